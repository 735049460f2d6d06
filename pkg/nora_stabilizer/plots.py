"""
Self-contained SVG line plots rendered from the ``plot.svg`` template.
"""

from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from nora_stabilizer.utils import nora_jinja_env

WIDTH = 640
HEIGHT = 420
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")

Tick = namedtuple(typename="Tick", field_names=["value", "position"])
Line = namedtuple(
    typename="Line", field_names=["label", "color", "points", "dashed", "markers"]
)


@dataclass(frozen=True)
class Frame:
    left: float = 70.0
    top: float = 35.0
    right: float = WIDTH - 20.0
    bottom: float = HEIGHT - 45.0

    @property
    def width(self) -> float:
        return self.right - self.left

    @property
    def height(self) -> float:
        return self.bottom - self.top


@dataclass
class Series:
    label: str
    x: Sequence[float]
    y: Sequence[float]
    dashed: bool = False
    markers: bool = True
    color: Optional[str] = None


@dataclass
class Axis:
    log: bool = False
    values: List[float] = field(default_factory=list)

    def keep(self, value: float) -> bool:
        return math.isfinite(value) and (value > 0 or not self.log)

    def transform(self, value: float) -> float:
        return math.log10(value) if self.log else value

    def limits(self):
        transformed = [self.transform(v) for v in self.values] or [0.0, 1.0]
        low, high = min(transformed), max(transformed)
        if low == high:
            low, high = low - 0.5, high + 0.5
        return low, high

    def ticks(self, count: int = 5) -> List[float]:
        low, high = self.limits()
        if self.log:
            decades = range(math.floor(low), math.ceil(high) + 1)
            return [10.0**decade for decade in decades if low <= decade <= high] or [
                10.0**low
            ]
        return [float(v) for v in np.linspace(low, high, count)]


def _scale(value: float, low: float, high: float, start: float, stop: float) -> float:
    return start + (value - low) / (high - low) * (stop - start)


def line_plot(
    series: Sequence[Series],
    title: str,
    x_label: str,
    y_label: str,
    log_x: bool = False,
    log_y: bool = False,
    metadata: str = "",
) -> str:
    """
    Points that cannot be drawn (NaN, or non-positive on a log axis) are dropped. ``metadata``
    lands in the <desc> element.
    """
    frame = Frame()
    x_axis, y_axis = Axis(log=log_x), Axis(log=log_y)
    cleaned = []
    for item in series:
        pairs = [
            (float(x), float(y))
            for x, y in zip(item.x, item.y)
            if x is not None and y is not None and x_axis.keep(float(x)) and y_axis.keep(float(y))
        ]
        cleaned.append((item, pairs))
        x_axis.values.extend(x for x, _ in pairs)
        y_axis.values.extend(y for _, y in pairs)
    x_low, x_high = x_axis.limits()
    y_low, y_high = y_axis.limits()

    def to_pixels(x: float, y: float):
        return (
            _scale(x_axis.transform(x), x_low, x_high, frame.left, frame.right),
            _scale(y_axis.transform(y), y_low, y_high, frame.bottom, frame.top),
        )

    lines = [
        Line(
            label=item.label,
            color=item.color or PALETTE[index % len(PALETTE)],
            points=[to_pixels(x, y) for x, y in pairs],
            dashed=item.dashed,
            markers=item.markers,
        )
        for index, (item, pairs) in enumerate(cleaned)
        if pairs
    ]
    x_ticks = [
        Tick(value, _scale(x_axis.transform(value), x_low, x_high, frame.left, frame.right))
        for value in x_axis.ticks()
    ]
    y_ticks = [
        Tick(value, _scale(y_axis.transform(value), y_low, y_high, frame.bottom, frame.top))
        for value in y_axis.ticks()
    ]
    template = nora_jinja_env.get_template("plot.svg")
    return template.render(
        width=WIDTH,
        height=HEIGHT,
        title=title,
        metadata=metadata,
        x_label=x_label,
        y_label=y_label,
        frame=frame,
        x_ticks=x_ticks,
        y_ticks=y_ticks,
        lines=lines,
    )
