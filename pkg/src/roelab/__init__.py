"""Windowed coarse ordinary cohomology, its axiom checks, Rips shadows and the variation extension."""

from __future__ import annotations

__version__ = "0.1.0"

from .cohomology import WindowSchedule, hax
from .rips import build_rips, q_shadow, rips_pair_cohomology
from .snf import AbelianGroup, smith_normal_form
from .spaces import AmbientSpec, Window, make_window
from .variation import extend_function, verify_extension

__all__ = [
    "AbelianGroup", "AmbientSpec", "Window", "WindowSchedule", "build_rips", "extend_function", "hax",
    "make_window", "q_shadow", "rips_pair_cohomology", "smith_normal_form", "verify_extension",
]
