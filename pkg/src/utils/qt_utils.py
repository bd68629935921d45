import os

from PySide6.QtCore import QCoreApplication
from PySide6.QtGui import QGuiApplication


def ensure_application() -> QCoreApplication:
    """Return the running Qt application, creating a headless one if needed.

    Sweeps and SVG rendering never open a window, so the offscreen platform
    is selected unless the caller already chose one.
    """
    app = QCoreApplication.instance()
    if app is None:
        os.environ.setdefault("QT_QPA_PLATFORM", "offscreen")
        app = QGuiApplication([])
    return app
