"""Geodesics, conjugate loci and Seifert cylinder coordinates near the Hill boundary."""

try:
    from ._hillscope import *  # noqa: F401,F403
    from ._hillscope import __doc__ as _core_doc
except ImportError:  # development layout: module built next to the package
    from _hillscope import *  # noqa: F401,F403
    from _hillscope import __doc__ as _core_doc

__doc__ = _core_doc
__version__ = "0.1.0"
