"""Trigger patterns and their bit-exact application to u8 images.

Three application kinds cover the five classic patterns:

* replace  - masked pixels are overwritten: the white square, the seeded
  random square, and the four-corner binary patches.
* blend    - per-pixel convex combination with a seeded full-frame
  pattern at a fixed alpha.
* additive - a horizontal sinusoid added to every row and channel.

All intermediate arithmetic is float64; rounding is half-up followed by
clamping to [0, 255], so outputs are reproducible bit for bit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import FormatError, ValidationError


class Corner(enum.Enum):
    TOP_LEFT = "top-left"
    TOP_RIGHT = "top-right"
    BOTTOM_LEFT = "bottom-left"
    BOTTOM_RIGHT = "bottom-right"


class PatchColor(enum.Enum):
    WHITE = "white"
    RANDOM = "random"


@dataclass(frozen=True)
class ReplaceSquare:
    """A side x side patch at a corner; white or seeded random per channel."""

    side: int = 3
    color: PatchColor = PatchColor.WHITE
    seed: int = 0
    anchor: Corner = Corner.BOTTOM_RIGHT
    margin: int = 0


@dataclass(frozen=True)
class FourCorner:
    """Seeded {0, 255} patches in all four corners, shared across channels."""

    patch_side: int = 3
    seed: int = 0


@dataclass(frozen=True)
class Blend:
    """Full-frame seeded random pattern blended at the given alpha."""

    alpha: float = 0.2
    pattern_seed: int = 0


@dataclass(frozen=True)
class Sinusoid:
    """Horizontal sine of amplitude delta with freq cycles per row."""

    delta: float = 20.0
    freq: int = 6


TriggerSpec = Union[ReplaceSquare, FourCorner, Blend, Sinusoid]


@dataclass(eq=False)
class ReplaceRender:
    mask: np.ndarray  # (H, W) bool
    pattern: np.ndarray  # (C, H, W) u8


@dataclass(eq=False)
class BlendRender:
    pattern: np.ndarray  # (C, H, W) u8
    alpha: float


@dataclass(eq=False)
class AdditiveRender:
    field: np.ndarray  # (H, W) float64


RenderedTrigger = Union[ReplaceRender, BlendRender, AdditiveRender]


def _corner_block(anchor: Corner, side: int, margin: int, h: int, w: int):
    if side + margin > min(h, w):
        raise ValidationError(
            f"{side}x{side} patch with margin {margin} exceeds {h}x{w} image"
        )
    top = margin if anchor in (Corner.TOP_LEFT, Corner.TOP_RIGHT) else h - margin - side
    left = margin if anchor in (Corner.TOP_LEFT, Corner.BOTTOM_LEFT) else w - margin - side
    return slice(top, top + side), slice(left, left + side)


def render(spec: TriggerSpec, channels: int, height: int, width: int) -> RenderedTrigger:
    """Materialize a trigger at the given image dimensions."""
    if min(channels, height, width) <= 0:
        raise ValidationError("image dimensions must be positive")
    if isinstance(spec, ReplaceSquare):
        if spec.side < 1 or spec.margin < 0:
            raise ValidationError("side must be >= 1 and margin >= 0")
        rows, cols = _corner_block(spec.anchor, spec.side, spec.margin, height, width)
        mask = np.zeros((height, width), dtype=bool)
        mask[rows, cols] = True
        pattern = np.zeros((channels, height, width), dtype=np.uint8)
        if spec.color is PatchColor.WHITE:
            pattern[:, rows, cols] = 255
        else:
            rng = np.random.default_rng(spec.seed)
            pattern[:, rows, cols] = rng.integers(
                0, 256, size=(channels, spec.side, spec.side), dtype=np.uint8
            )
        return ReplaceRender(mask=mask, pattern=pattern)
    if isinstance(spec, FourCorner):
        if spec.patch_side < 1 or spec.patch_side > min(height, width):
            raise ValidationError(f"patch_side {spec.patch_side} exceeds {height}x{width}")
        rng = np.random.default_rng(spec.seed)
        mask = np.zeros((height, width), dtype=bool)
        pattern = np.zeros((channels, height, width), dtype=np.uint8)
        for anchor in (Corner.TOP_LEFT, Corner.TOP_RIGHT, Corner.BOTTOM_LEFT, Corner.BOTTOM_RIGHT):
            rows, cols = _corner_block(anchor, spec.patch_side, 0, height, width)
            mask[rows, cols] = True
            bits = rng.integers(0, 2, size=(spec.patch_side, spec.patch_side), dtype=np.uint8)
            pattern[:, rows, cols] = bits * 255
        return ReplaceRender(mask=mask, pattern=pattern)
    if isinstance(spec, Blend):
        if not 0.0 < spec.alpha < 1.0:
            raise ValidationError(f"alpha must lie in (0, 1), got {spec.alpha}")
        rng = np.random.default_rng(spec.pattern_seed)
        pattern = rng.integers(0, 256, size=(channels, height, width), dtype=np.uint8)
        return BlendRender(pattern=pattern, alpha=float(spec.alpha))
    if isinstance(spec, Sinusoid):
        if spec.delta < 0 or spec.freq < 1:
            raise ValidationError("delta must be >= 0 and freq >= 1")
        j = np.arange(width, dtype=np.float64)
        row = spec.delta * np.sin(2.0 * np.pi * j * spec.freq / width)
        return AdditiveRender(field=np.tile(row, (height, 1)))
    raise ValidationError(f"unknown trigger spec {spec!r}")


def _round_clamp_u8(values: np.ndarray) -> np.ndarray:
    # half-up, then clamp
    return np.clip(np.floor(values + 0.5), 0.0, 255.0).astype(np.uint8)


def apply(image: np.ndarray, rt: RenderedTrigger) -> np.ndarray:
    """Return the triggered copy of one (C, H, W) u8 image."""
    if image.ndim != 3 or image.dtype != np.uint8:
        raise ValidationError("image must be a (C, H, W) uint8 array")
    if isinstance(rt, ReplaceRender):
        if image.shape != rt.pattern.shape:
            raise ValidationError(f"image {image.shape} does not match trigger {rt.pattern.shape}")
        out = image.copy()
        out[:, rt.mask] = rt.pattern[:, rt.mask]
        return out
    if isinstance(rt, BlendRender):
        if image.shape != rt.pattern.shape:
            raise ValidationError(f"image {image.shape} does not match trigger {rt.pattern.shape}")
        mixed = (1.0 - rt.alpha) * image.astype(np.float64) + rt.alpha * rt.pattern.astype(
            np.float64
        )
        return _round_clamp_u8(mixed)
    if isinstance(rt, AdditiveRender):
        if image.shape[1:] != rt.field.shape:
            raise ValidationError(f"image {image.shape} does not match field {rt.field.shape}")
        return _round_clamp_u8(image.astype(np.float64) + rt.field[None, :, :])
    raise ValidationError(f"unknown rendered trigger {rt!r}")


def trigger_to_json(spec: TriggerSpec) -> dict:
    if isinstance(spec, ReplaceSquare):
        return {
            "variant": "replace_square",
            "side": spec.side,
            "color": spec.color.value,
            "seed": spec.seed,
            "anchor": spec.anchor.value,
            "margin": spec.margin,
        }
    if isinstance(spec, FourCorner):
        return {"variant": "four_corner", "patch_side": spec.patch_side, "seed": spec.seed}
    if isinstance(spec, Blend):
        return {"variant": "blend", "alpha": spec.alpha, "pattern_seed": spec.pattern_seed}
    if isinstance(spec, Sinusoid):
        return {"variant": "sinusoid", "delta": spec.delta, "freq": spec.freq}
    raise ValidationError(f"unknown trigger spec {spec!r}")


def trigger_from_json(doc: dict) -> TriggerSpec:
    if not isinstance(doc, dict) or "variant" not in doc:
        raise FormatError("trigger JSON must be an object with a 'variant' key")
    variant = doc.get("variant")
    fields = {k: v for k, v in doc.items() if k != "variant"}
    try:
        if variant == "replace_square":
            if "color" in fields:
                fields["color"] = PatchColor(fields["color"])
            if "anchor" in fields:
                fields["anchor"] = Corner(fields["anchor"])
            return ReplaceSquare(**fields)
        if variant == "four_corner":
            return FourCorner(**fields)
        if variant == "blend":
            return Blend(**fields)
        if variant == "sinusoid":
            return Sinusoid(**fields)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad fields for trigger variant {variant!r}: {exc}") from exc
    raise FormatError(f"unknown trigger variant {variant!r}")
