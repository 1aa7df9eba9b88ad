"""Flat ``key = value`` text files used for configs and model files."""

from __future__ import annotations

from pathlib import Path

from .errors import ConfigError


def parse_kv(text: str, *, path: str | None = None) -> dict[str, tuple[str, int]]:
    """Parse ``key = value`` lines into ``{key: (value, line_number)}``.

    Blank lines and lines starting with ``#`` are skipped. Duplicate keys and
    lines without ``=`` are errors carrying the line number.
    """
    out: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw!r}", path=path, line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", path=path, line=lineno)
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", path=path, line=lineno)
        out[key] = (value, lineno)
    return out


def read_kv(path: str | Path) -> dict[str, tuple[str, int]]:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError("file not found", path=str(p)) from None
    return parse_kv(text, path=str(p))


def format_kv(items: list[tuple[str, object]], header: list[str] | None = None) -> str:
    lines = [f"# {h}" for h in header or []]
    for key, value in items:
        if isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
