"""Static SVG heatmaps and line plots drawn with QPainter."""

import logging
import math
import os

import numpy as np
from PySide6.QtCore import QPointF, QRectF, QSize, Qt
from PySide6.QtGui import QColor, QFont, QPainter, QPainterPath, QPen
from PySide6.QtSvg import QSvgGenerator

from .qt_utils import ensure_application

logger = logging.getLogger(__name__)

WIDTH, HEIGHT = 720, 540
MARGIN_LEFT, MARGIN_RIGHT = 80, 110
MARGIN_TOP, MARGIN_BOTTOM = 40, 60
COLORBAR_WIDTH = 18
N_TICKS = 5

# viridis anchors, interpolated linearly
COLORMAP = np.array(
    [
        [68, 1, 84],
        [59, 82, 139],
        [33, 145, 140],
        [94, 201, 98],
        [253, 231, 37],
    ],
    dtype=float,
)
MISSING_COLOR = QColor(200, 200, 200)
LINE_COLORS = (QColor(31, 119, 180), QColor(214, 39, 40), QColor(44, 160, 44))


def _color(value: float, vmin: float, vmax: float) -> QColor:
    if not math.isfinite(value):
        return MISSING_COLOR
    span = vmax - vmin
    x = 0.0 if span <= 0 else (value - vmin) / span
    position = np.clip(x, 0.0, 1.0) * (len(COLORMAP) - 1)
    rgb = [
        np.interp(position, np.arange(len(COLORMAP)), COLORMAP[:, k])
        for k in range(3)
    ]
    return QColor(*(int(round(c)) for c in rgb))


def _finite_range(values) -> tuple[float, float]:
    finite = np.asarray(values, dtype=float)
    finite = finite[np.isfinite(finite)]
    if finite.size == 0:
        return 0.0, 1.0
    return float(finite.min()), float(finite.max())


class _SvgCanvas:
    """Opens a QPainter on an SVG file and maps data onto the plot area."""

    def __init__(self, path: str, title: str):
        ensure_application()
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        self.path = path
        self.generator = QSvgGenerator()
        self.generator.setFileName(path)
        self.generator.setSize(QSize(WIDTH, HEIGHT))
        self.generator.setViewBox(QRectF(0, 0, WIDTH, HEIGHT))
        self.generator.setTitle(title)
        self.title = title
        self.area = QRectF(
            MARGIN_LEFT,
            MARGIN_TOP,
            WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
            HEIGHT - MARGIN_TOP - MARGIN_BOTTOM,
        )
        self.painter = None

    def __enter__(self):
        self.painter = QPainter(self.generator)
        self.painter.setRenderHint(QPainter.Antialiasing)
        self.painter.fillRect(QRectF(0, 0, WIDTH, HEIGHT), Qt.white)
        self.painter.setFont(QFont("Sans", 10))
        return self

    def __exit__(self, *exc):
        try:
            self.painter.end()
        finally:
            self.painter = None
        if exc[0] is None:
            logger.info("wrote %s", self.path)
        return False

    def x_pixel(self, x, x_range):
        lo, hi = x_range
        span = (hi - lo) or 1.0
        return self.area.left() + (x - lo) / span * self.area.width()

    def y_pixel(self, y, y_range):
        lo, hi = y_range
        span = (hi - lo) or 1.0
        return self.area.bottom() - (y - lo) / span * self.area.height()

    def axes(self, x_range, y_range, x_label, y_label):
        p = self.painter
        p.setPen(QPen(Qt.black, 1))
        p.drawRect(self.area)
        for k in range(N_TICKS):
            fx = x_range[0] + (x_range[1] - x_range[0]) * k / (N_TICKS - 1)
            px = self.x_pixel(fx, x_range)
            p.drawLine(
                QPointF(px, self.area.bottom()),
                QPointF(px, self.area.bottom() + 5),
            )
            p.drawText(
                QRectF(px - 40, self.area.bottom() + 6, 80, 16),
                Qt.AlignHCenter,
                f"{fx:.3g}",
            )
            fy = y_range[0] + (y_range[1] - y_range[0]) * k / (N_TICKS - 1)
            py = self.y_pixel(fy, y_range)
            p.drawLine(
                QPointF(self.area.left() - 5, py),
                QPointF(self.area.left(), py),
            )
            p.drawText(
                QRectF(self.area.left() - 70, py - 8, 62, 16),
                Qt.AlignRight | Qt.AlignVCenter,
                f"{fy:.3g}",
            )
        p.drawText(
            QRectF(self.area.left(), HEIGHT - 30, self.area.width(), 20),
            Qt.AlignHCenter,
            x_label,
        )
        p.save()
        p.translate(18, self.area.center().y())
        p.rotate(-90)
        p.drawText(QRectF(-150, -10, 300, 20), Qt.AlignHCenter, y_label)
        p.restore()
        p.drawText(QRectF(0, 8, WIDTH, 24), Qt.AlignHCenter, self.title)

    def colorbar(self, vmin, vmax):
        p = self.painter
        left = self.area.right() + 20
        steps = 64
        height = self.area.height() / steps
        for k in range(steps):
            value = vmin + (vmax - vmin) * (k + 0.5) / steps
            top = self.area.bottom() - (k + 1) * height
            p.fillRect(
                QRectF(left, top, COLORBAR_WIDTH, height + 0.5),
                _color(value, vmin, vmax),
            )
        p.setPen(QPen(Qt.black, 1))
        p.drawRect(
            QRectF(left, self.area.top(), COLORBAR_WIDTH, self.area.height())
        )
        for k in range(N_TICKS):
            value = vmin + (vmax - vmin) * k / (N_TICKS - 1)
            py = self.area.bottom() - self.area.height() * k / (N_TICKS - 1)
            p.drawText(
                QRectF(left + COLORBAR_WIDTH + 4, py - 8, 60, 16),
                Qt.AlignLeft | Qt.AlignVCenter,
                f"{value:.3g}",
            )


def render_heatmap_svg(
    path: str,
    values,
    x_values,
    y_values,
    x_label: str,
    y_label: str,
    title: str = "",
) -> str:
    """values has shape (len(y_values), len(x_values))."""
    values = np.asarray(values, dtype=float)
    x_values = np.asarray(x_values, dtype=float)
    y_values = np.asarray(y_values, dtype=float)
    vmin, vmax = _finite_range(values)

    def edges(centers):
        if centers.size == 1:
            return np.array([centers[0] - 0.5, centers[0] + 0.5])
        mid = 0.5 * (centers[1:] + centers[:-1])
        first = centers[0] - (mid[0] - centers[0])
        last = centers[-1] + (centers[-1] - mid[-1])
        return np.concatenate([[first], mid, [last]])

    x_edges, y_edges = edges(x_values), edges(y_values)
    x_range = (float(x_edges[0]), float(x_edges[-1]))
    y_range = (float(y_edges[0]), float(y_edges[-1]))

    with _SvgCanvas(path, title) as canvas:
        for iy in range(values.shape[0]):
            for ix in range(values.shape[1]):
                left = canvas.x_pixel(x_edges[ix], x_range)
                right = canvas.x_pixel(x_edges[ix + 1], x_range)
                top = canvas.y_pixel(y_edges[iy + 1], y_range)
                bottom = canvas.y_pixel(y_edges[iy], y_range)
                canvas.painter.fillRect(
                    QRectF(
                        min(left, right),
                        min(top, bottom),
                        abs(right - left) + 0.5,
                        abs(bottom - top) + 0.5,
                    ),
                    _color(values[iy, ix], vmin, vmax),
                )
        canvas.axes(x_range, y_range, x_label, y_label)
        canvas.colorbar(vmin, vmax)
    return path


def render_line_svg(
    path: str,
    x_values,
    series: dict,
    x_label: str,
    y_label: str,
    title: str = "",
) -> str:
    """series maps a legend label to y values sampled on x_values."""
    x_values = np.asarray(x_values, dtype=float)
    lo, hi = _finite_range(
        np.concatenate([np.ravel(v) for v in series.values()])
    )
    pad = 0.05 * (hi - lo) or 0.05
    x_range = (float(x_values.min()), float(x_values.max()))
    y_range = (lo - pad, hi + pad)

    with _SvgCanvas(path, title) as canvas:
        canvas.axes(x_range, y_range, x_label, y_label)
        p = canvas.painter
        for k, (label, ys) in enumerate(series.items()):
            color = LINE_COLORS[k % len(LINE_COLORS)]
            p.setPen(QPen(color, 2))
            line = QPainterPath()
            drawing = False
            for x, y in zip(x_values, np.asarray(ys, dtype=float)):
                if not math.isfinite(y):
                    drawing = False
                    continue
                point = QPointF(
                    canvas.x_pixel(x, x_range), canvas.y_pixel(y, y_range)
                )
                if drawing:
                    line.lineTo(point)
                else:
                    line.moveTo(point)
                    drawing = True
            p.drawPath(line)
            legend_y = canvas.area.top() + 16 * k
            legend_x = canvas.area.right() + 12
            p.drawLine(
                QPointF(legend_x, legend_y + 8),
                QPointF(legend_x + 18, legend_y + 8),
            )
            p.setPen(QPen(Qt.black, 1))
            p.drawText(
                QRectF(legend_x + 22, legend_y, 80, 16),
                Qt.AlignLeft | Qt.AlignVCenter,
                label,
            )
    return path
