"""Frame sampling and windowing driving a pluggable captioner.

Frames are sampled every n-th index, grouped into windows where adjacent
windows share exactly one boundary frame, and each window is captioned as a
unit. The caption attaches to the window's last frame (its anchor). Label
context threads through the windows in order so a captioner can keep entity
labels consistent across the whole stream.
"""

from __future__ import annotations

import base64
import json
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Protocol

from . import captions, providers
from .models import GroundMemError

DEFAULT_SAMPLE_RATE_HZ = 3.0
DEFAULT_EVERY_NTH = 5
DEFAULT_WINDOW_SIZE = 3

CAPTIONER_ATTEMPTS = 3
CAPTIONER_BACKOFF_SECONDS = (0.5, 1.0)


class PerceptionError(GroundMemError):
    pass


class InvalidWindowSize(PerceptionError):
    pass


class CaptionerFailure(PerceptionError):
    def __init__(self, window_index: int, attempts: int, cause: str) -> None:
        super().__init__(
            f"captioner failed on window {window_index} after {attempts} attempt(s): {cause}"
        )
        self.window_index = window_index
        self.attempts = attempts


class MalformedWindowCaption(PerceptionError):
    def __init__(self, window_index: int, cause: str) -> None:
        super().__init__(f"window {window_index} produced an invalid caption: {cause}")
        self.window_index = window_index


@dataclass(frozen=True)
class PerceptionParams:
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ
    every_nth: int = DEFAULT_EVERY_NTH
    window_size: int = DEFAULT_WINDOW_SIZE

    def validate(self) -> None:
        if self.sample_rate_hz <= 0:
            raise PerceptionError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        if self.every_nth < 1:
            raise PerceptionError(f"every_nth must be >= 1, got {self.every_nth}")
        if self.window_size < 2:
            raise InvalidWindowSize(f"window_size must be >= 2, got {self.window_size}")


@dataclass(frozen=True)
class Window:
    frame_indices: tuple[int, ...]

    @property
    def anchor(self) -> int:
        return self.frame_indices[-1]


@dataclass(frozen=True)
class WindowCaption:
    anchor_index: int
    caption: str


class CaptionerContract(Protocol):
    """Captions one window of frames, reusing labels already in circulation."""

    def caption_window(self, frame_refs: list[str], prior_labels: list[str]) -> str: ...


def sample_frames(frame_count: int, every_nth: int) -> list[int]:
    """Indices of the frames to caption: every n-th frame starting at 0."""
    if frame_count < 0:
        raise PerceptionError(f"frame_count must be >= 0, got {frame_count}")
    if every_nth < 1:
        raise PerceptionError(f"every_nth must be >= 1, got {every_nth}")
    return list(range(0, frame_count, every_nth))


def make_windows(sampled: list[int], window_size: int) -> list[Window]:
    """Group sampled indices into windows sharing one boundary frame.

    The walk takes window_size indices, then restarts on the window's last
    index, so consecutive windows overlap in exactly that frame. A short
    final window covers any remainder.
    """
    if window_size < 2:
        raise InvalidWindowSize(f"window_size must be >= 2, got {window_size}")
    for a, b in zip(sampled, sampled[1:]):
        if b <= a:
            raise PerceptionError("sampled indices must be strictly increasing")
    windows: list[Window] = []
    n = len(sampled)
    i = 0
    while i < n:
        j = min(i + window_size, n)
        windows.append(Window(frame_indices=tuple(sampled[i:j])))
        if j == n:
            break
        # Restart on the last index so adjacent windows share one frame.
        i = j - 1
    return windows


def run_perception(
    frame_refs: list[str],
    params: PerceptionParams,
    captioner: CaptionerContract,
    sleep: Callable[[float], None] = time.sleep,
) -> list[WindowCaption]:
    """Caption every window over the sampled frames, in anchor order.

    Each caption is validated against the annotation grammar before being
    returned; labels seen so far are passed to each subsequent window.
    """
    params.validate()
    sampled = sample_frames(len(frame_refs), params.every_nth)
    windows = make_windows(sampled, params.window_size)
    results: list[WindowCaption] = []
    known_labels: list[str] = []
    seen_labels: set[str] = set()
    for window_index, window in enumerate(windows):
        refs = [frame_refs[i] for i in window.frame_indices]
        last_error = ""
        caption_text: str | None = None
        for attempt in range(CAPTIONER_ATTEMPTS):
            try:
                caption_text = captioner.caption_window(refs, list(known_labels))
                break
            except Exception as exc:  # noqa: BLE001 - captioner is external code
                last_error = str(exc)
                if attempt < len(CAPTIONER_BACKOFF_SECONDS):
                    sleep(CAPTIONER_BACKOFF_SECONDS[attempt])
        if caption_text is None:
            raise CaptionerFailure(window_index, CAPTIONER_ATTEMPTS, last_error)
        try:
            parsed = captions.parse_caption(caption_text)
        except captions.CaptionError as exc:
            raise MalformedWindowCaption(window_index, str(exc)) from exc
        for mention in parsed.mentions:
            if mention.label not in seen_labels:
                seen_labels.add(mention.label)
                known_labels.append(mention.label)
        results.append(WindowCaption(anchor_index=window.anchor, caption=caption_text))
    return results


@dataclass
class ReplayCaptioner:
    """Replays captions from a JSON-lines fixture keyed by anchor index.

    Each line is ``{"anchor_index": int, "caption": str}``. Windows are
    served in fixture order; the anchor of each served window must match
    the fixture line's anchor_index.
    """

    entries: list[WindowCaption]
    _cursor: int = field(default=0, repr=False)

    @classmethod
    def from_jsonl(cls, path: str) -> "ReplayCaptioner":
        entries: list[WindowCaption] = []
        with open(path, encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                    entries.append(
                        WindowCaption(
                            anchor_index=int(record["anchor_index"]),
                            caption=str(record["caption"]),
                        )
                    )
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise PerceptionError(f"{path}:{line_no}: bad fixture line: {exc}") from exc
        return cls(entries=entries)

    def caption_window(self, frame_refs: list[str], prior_labels: list[str]) -> str:
        if self._cursor >= len(self.entries):
            raise PerceptionError("replay fixture exhausted")
        entry = self.entries[self._cursor]
        self._cursor += 1
        return entry.caption


def load_caption_fixture(path: str) -> list[WindowCaption]:
    """Read a caption fixture without driving the windowing machinery."""
    return ReplayCaptioner.from_jsonl(path).entries


def caption_prompt(known_labels: list[str]) -> str:
    """The three-step captioning prompt with the label context filled in."""
    template = resources.files("groundmem.data").joinpath("caption_prompt.txt").read_text("utf-8")
    labels = ", ".join(known_labels) if known_labels else "(none yet)"
    return template.replace("{known_labels}", labels)


@dataclass
class LiveCaptioner:
    """Captions windows through a chat provider, frames attached as base64."""

    client: "providers.ChatClient"
    model: str

    def caption_window(self, frame_refs: list[str], prior_labels: list[str]) -> str:
        images: list[str] = []
        for ref in frame_refs:
            with open(ref, "rb") as handle:
                images.append(base64.b64encode(handle.read()).decode("ascii"))
        request = providers.ChatRequest(
            messages=(
                providers.ChatMessage(role="system", content=caption_prompt(prior_labels)),
                providers.ChatMessage(
                    role="user",
                    content="Caption this frame window.",
                    images=tuple(images),
                ),
            ),
            model=self.model,
            temperature=0.0,
        )
        return self.client.chat(request).content
