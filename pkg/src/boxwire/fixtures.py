"""Embedded reference data: published boxes and wiring tables."""

from __future__ import annotations

from fractions import Fraction
from importlib import resources

from .box_model import Box3, parse_box
from .wiring import parse_wiring

BOXES = ("ts2", "pb", "rtts1", "rtts2", "rnns1", "rnns2")
WIRING_TABLES = ("nns", "tts", "nss", "tss")


def _read(name: str) -> str:
    return resources.files(__package__).joinpath("data").joinpath(name).read_text(encoding="utf-8")


def box_text(name: str) -> str:
    return _read(f"{name}.box")


def load_box(name: str) -> Box3:
    return parse_box(box_text(name))


def load_wiring_table(name: str) -> list:
    """Rows ``(number, published WN, wiring)`` for pair 12, party 1 first."""
    rows = []
    for line in _read(f"tab_{name}.txt").splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        no, wn, poly = line.split(None, 2)
        rows.append((int(no), Fraction(wn), parse_wiring(poly)))
    return rows
