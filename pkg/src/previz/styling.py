"""Resemblance levels, guidance parameters, prompt composition, and
regional conditioning assembly.

The four resemblance levels map to generation parameters exactly:

    level     skip   control strength   latent blend
    Strict      5          0.7              on
    Faithful    1          0.7              on
    Flexible    0          0.7              on
    Loose       0          0.3              off

at 20 total steps; skip scales proportionally for other step counts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from string import Template
from typing import Optional

import numpy as np

TOTAL_STEPS_DEFAULT = 20
CREATIVE_WEIGHT_DEFAULT = 0.35

STYLES_SCHEMA = "previz-styles/1"


class StylingError(Exception):
    pass


class MissingDescription(StylingError):
    pass


class UnmatchedMask(StylingError):
    pass


class ResemblanceLevel(Enum):
    """Adherence order: Strict > Faithful > Flexible > Loose."""

    STRICT = "strict"
    FAITHFUL = "faithful"
    FLEXIBLE = "flexible"
    LOOSE = "loose"

    @staticmethod
    def parse(name: str) -> "ResemblanceLevel":
        try:
            return ResemblanceLevel(name.strip().lower())
        except ValueError:
            raise StylingError(f"unknown resemblance level {name!r}") from None


class StyleTag(Enum):
    ANIME = "Anime"
    CARTOON3D = "Cartoon3D"
    PIXEL_ART = "PixelArt"
    REALISM = "Realism"
    CINEMATIC = "Cinematic"

    @staticmethod
    def parse(name: str) -> "StyleTag":
        for tag in StyleTag:
            if tag.value.lower() == name.strip().lower():
                return tag
        raise StylingError(f"unknown style {name!r}")


class VideoGuidanceMode(Enum):
    RESEMBLE = "resemble"
    CREATIVE = "creative"


@dataclass(frozen=True)
class GuidanceParams:
    total_steps: int
    skip_steps: int
    control_strength: float
    use_latent_blend: bool

    def __post_init__(self):
        if not (0 <= self.skip_steps < self.total_steps):
            raise StylingError(f"need 0 <= skip ({self.skip_steps}) < total ({self.total_steps})")
        if not (0.0 <= self.control_strength <= 1.0):
            raise StylingError(f"control strength {self.control_strength} outside [0,1]")

    def to_dict(self) -> dict:
        return {
            "total_steps": self.total_steps,
            "skip_steps": self.skip_steps,
            "control_strength": self.control_strength,
            "use_latent_blend": self.use_latent_blend,
        }


_LEVEL_TABLE = {
    ResemblanceLevel.STRICT: (5, 0.7, True),
    ResemblanceLevel.FAITHFUL: (1, 0.7, True),
    ResemblanceLevel.FLEXIBLE: (0, 0.7, True),
    ResemblanceLevel.LOOSE: (0, 0.3, False),
}


def resemblance_params(level: ResemblanceLevel, total_steps: int = TOTAL_STEPS_DEFAULT) -> GuidanceParams:
    """Guidance parameters for a resemblance level.

    skip scales as round(base_skip * total / 20) away from the 20-step
    reference, rounding half away from zero.
    """
    if total_steps < 1:
        raise StylingError(f"total_steps must be >= 1, got {total_steps}")
    base_skip, strength, blend = _LEVEL_TABLE[level]
    skip = int(math.floor(base_skip * total_steps / TOTAL_STEPS_DEFAULT + 0.5))
    skip = min(skip, total_steps - 1)
    return GuidanceParams(
        total_steps=total_steps,
        skip_steps=skip,
        control_strength=strength,
        use_latent_blend=blend,
    )


def video_guidance(mode: VideoGuidanceMode, creative_weight: Optional[float] = None) -> float:
    """Conditioning weight: Resemble follows the spatial guidance fully;
    Creative leans on the text prompt (default weight is a config choice)."""
    if mode is VideoGuidanceMode.RESEMBLE:
        return 1.0
    w = CREATIVE_WEIGHT_DEFAULT if creative_weight is None else creative_weight
    if not (0.0 <= w <= 1.0):
        raise StylingError(f"conditioning weight {w} outside [0,1]")
    return w


# ---------------------------------------------------------------------------
# Prompt composition


@dataclass(frozen=True)
class CharacterProfile:
    character_id: str
    display_name: str
    identity_prompt: str
    lora_ref: Optional[str] = None
    lora_weight: float = 0.8

    def __post_init__(self):
        if not (0.0 < self.lora_weight <= 1.0):
            raise StylingError(f"lora weight {self.lora_weight} outside (0,1]")


@dataclass(frozen=True)
class PromptFields:
    style: StyleTag
    background_description: str
    mood_tone: str = ""
    genre: str = ""
    characters: tuple[CharacterProfile, ...] = ()
    motion_prompt: Optional[str] = None


@dataclass(frozen=True)
class PromptBundle:
    background_prompt: str
    style_tag: StyleTag
    mood_tone: str
    genre: str
    per_character: tuple[tuple[str, str], ...]
    motion_prompt: Optional[str]
    seed: int

    def to_dict(self) -> dict:
        return {
            "background_prompt": self.background_prompt,
            "style_tag": self.style_tag.value,
            "mood_tone": self.mood_tone,
            "genre": self.genre,
            "per_character": dict(self.per_character),
            "motion_prompt": self.motion_prompt,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(d: dict) -> "PromptBundle":
        return PromptBundle(
            background_prompt=d["background_prompt"],
            style_tag=StyleTag.parse(d["style_tag"]),
            mood_tone=d.get("mood_tone", ""),
            genre=d.get("genre", ""),
            per_character=tuple(sorted(d.get("per_character", {}).items())),
            motion_prompt=d.get("motion_prompt"),
            seed=int(d.get("seed", 0)),
        )


def _load_template(name: str) -> Template:
    text = resources.files("previz.templates").joinpath(name).read_text(encoding="utf-8")
    return Template(text.rstrip("\n"))


def style_lexicon() -> dict[StyleTag, str]:
    text = resources.files("previz.templates").joinpath("style_lexicon_v1.txt").read_text(encoding="utf-8")
    out = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        name, _, words = line.partition(":")
        out[StyleTag.parse(name)] = words.strip()
    return out


def compose_prompt(fields: PromptFields, seed: int = 0, lm_client=None) -> PromptBundle:
    """Deterministic template expansion of the prompt-composer fields.

    A configured language-model client may replace the background template;
    on any client failure the template result is used unchanged.
    """
    description = fields.background_description.strip()
    if not description:
        raise MissingDescription("background description must be non-empty")
    lexicon = style_lexicon()[fields.style]
    genre = fields.genre.strip()
    mood = fields.mood_tone.strip()
    background = _load_template("background_v1.txt").substitute(
        style_lexicon=lexicon,
        genre_clause=f", {genre} scene" if genre else "",
        mood_clause=f", {mood} mood" if mood else "",
        description=description,
    )
    if lm_client is not None:
        expanded = lm_client.expand(fields)
        if expanded and description in expanded:
            background = expanded

    char_template = _load_template("character_v1.txt")
    per_character = tuple(
        (p.character_id, char_template.substitute(
            identity=p.identity_prompt.strip(),
            style_hint=f"rendered in {lexicon.split(',')[0]}",
        ))
        for p in fields.characters
    )
    return PromptBundle(
        background_prompt=background,
        style_tag=fields.style,
        mood_tone=mood,
        genre=genre,
        per_character=per_character,
        motion_prompt=fields.motion_prompt,
        seed=seed,
    )


class LanguageModelClient:
    """Optional HTTP prompt expander; single POST endpoint, 10 s budget.

    Request: JSON {style, mood_tone, genre, background_description,
    characters: [{id, identity}]}. Response: JSON {"prompt": text}.
    Any failure returns None and the caller keeps the template output.
    """

    def __init__(self, endpoint: str, timeout: float = 10.0):
        self.endpoint = endpoint
        self.timeout = timeout

    def expand(self, fields: PromptFields) -> Optional[str]:
        import httpx

        payload = {
            "style": fields.style.value,
            "mood_tone": fields.mood_tone,
            "genre": fields.genre,
            "background_description": fields.background_description,
            "characters": [
                {"id": p.character_id, "identity": p.identity_prompt} for p in fields.characters
            ],
        }
        try:
            resp = httpx.post(self.endpoint, json=payload, timeout=self.timeout)
            resp.raise_for_status()
            return resp.json().get("prompt")
        except Exception:
            return None


# ---------------------------------------------------------------------------
# Style registry


@dataclass(frozen=True)
class StyleEntry:
    style: StyleTag
    lora_ref: Optional[str]  # asset id of the adapter; None = prompt-only
    weight: float = 0.8


@dataclass(frozen=True)
class StyleRegistry:
    entries: tuple[StyleEntry, ...]

    def entry(self, style: StyleTag) -> StyleEntry:
        for e in self.entries:
            if e.style is style:
                return e
        raise StylingError(f"style {style.value} not registered")


def default_registry() -> StyleRegistry:
    return StyleRegistry(entries=(
        StyleEntry(StyleTag.ANIME, "lora-anime-v1", 0.8),
        StyleEntry(StyleTag.CARTOON3D, "lora-cartoon3d-v1", 0.8),
        StyleEntry(StyleTag.PIXEL_ART, "lora-pixelart-v1", 0.9),
        StyleEntry(StyleTag.REALISM, "lora-realism-v1", 0.7),
        StyleEntry(StyleTag.CINEMATIC, None),
    ))


def parse_registry(text: str) -> StyleRegistry:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0] != STYLES_SCHEMA:
        raise StylingError(f"registry must start with {STYLES_SCHEMA!r}")
    entries = []
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] != "style":
            raise StylingError(f"unexpected registry line {ln!r}")
        style = StyleTag.parse(parts[1])
        if parts[2:] == ["prompt-only"]:
            entries.append(StyleEntry(style, None))
        elif len(parts) == 6 and parts[2] == "lora" and parts[4] == "weight":
            entries.append(StyleEntry(style, parts[3], float(parts[5])))
        else:
            raise StylingError(f"malformed registry line {ln!r}")
    return StyleRegistry(entries=tuple(entries))


def dump_registry(reg: StyleRegistry) -> str:
    out = [STYLES_SCHEMA]
    for e in reg.entries:
        if e.lora_ref is None:
            out.append(f"style {e.style.value} prompt-only")
        else:
            out.append(f"style {e.style.value} lora {e.lora_ref} weight {e.weight!r}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Regional conditioning


@dataclass(frozen=True)
class Region:
    role: str  # "character" | "background"
    prompt: str
    mask_ref: Optional[str] = None  # asset hash when persisted
    character_id: Optional[str] = None
    loras: tuple[tuple[str, float], ...] = ()


@dataclass(frozen=True)
class RegionalConditioning:
    regions: tuple[Region, ...]

    def __post_init__(self):
        bg = [r for r in self.regions if r.role == "background"]
        if len(bg) != 1:
            raise StylingError(f"need exactly one background region, found {len(bg)}")
        if self.regions[-1].role != "background":
            raise StylingError("regions must list characters first, background last")

    def to_dict(self) -> dict:
        return {
            "regions": [
                {
                    "role": r.role,
                    "prompt": r.prompt,
                    "mask_ref": r.mask_ref,
                    "character_id": r.character_id,
                    "loras": [[a, w] for a, w in r.loras],
                }
                for r in self.regions
            ]
        }

    @staticmethod
    def from_dict(d: dict) -> "RegionalConditioning":
        return RegionalConditioning(regions=tuple(
            Region(
                role=r["role"],
                prompt=r["prompt"],
                mask_ref=r.get("mask_ref"),
                character_id=r.get("character_id"),
                loras=tuple((a, float(w)) for a, w in r.get("loras", [])),
            )
            for r in d["regions"]
        ))


def _mask_png(mask: np.ndarray) -> bytes:
    import io

    from PIL import Image

    buf = io.BytesIO()
    Image.fromarray(mask, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def assemble_regional(
    frame_masks,
    profiles: list[CharacterProfile],
    bundle: PromptBundle,
    store=None,
    registry: Optional[StyleRegistry] = None,
) -> RegionalConditioning:
    """Character regions (profile prompt + identity LoRA inside each mask)
    followed by the background region. Masks persist into the store when
    one is given, so regions carry resolvable refs."""
    profile_map = {p.character_id: p for p in profiles}
    per_char = dict(bundle.per_character)
    reg = registry if registry is not None else default_registry()
    style_entry = reg.entry(bundle.style_tag)

    regions = []
    for cid, mask in frame_masks.characters:
        profile = profile_map.get(cid)
        if profile is None:
            raise UnmatchedMask(f"mask {cid!r} has no character profile")
        prompt = per_char.get(cid, profile.identity_prompt)
        loras = []
        if profile.lora_ref:
            loras.append((profile.lora_ref, profile.lora_weight))
        regions.append(Region(
            role="character",
            prompt=prompt,
            mask_ref=store.put(_mask_png(mask), "image/png").hash if store is not None else None,
            character_id=cid,
            loras=tuple(loras),
        ))
    bg_loras = ((style_entry.lora_ref, style_entry.weight),) if style_entry.lora_ref else ()
    regions.append(Region(
        role="background",
        prompt=bundle.background_prompt,
        mask_ref=store.put(_mask_png(frame_masks.background), "image/png").hash if store is not None else None,
        loras=bg_loras,
    ))
    return RegionalConditioning(regions=tuple(regions))
