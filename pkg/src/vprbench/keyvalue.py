"""Tiny plain-text key-value format: `key = value` lines plus one level of
`[section]` nesting. Used by dataset manifests (flat) and run configs.

Blank lines and `#` comments are ignored. Keys are case-sensitive.
"""

from __future__ import annotations


def parse_keyvalue(text: str) -> tuple[dict[str, str], dict[str, dict[str, str]]]:
    """Return (top_level, sections); raises ValueError with a line number."""
    top: dict[str, str] = {}
    sections: dict[str, dict[str, str]] = {}
    current: dict[str, str] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if not name:
                raise ValueError(f"line {lineno}: empty section name")
            current = sections.setdefault(name, {})
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        target = top if current is None else current
        target[key] = value.strip()
    return top, sections


def format_keyvalue(top: dict, sections: dict[str, dict] | None = None) -> str:
    lines = [f"{k} = {v}" for k, v in top.items()]
    for name, body in (sections or {}).items():
        lines.append("")
        lines.append(f"[{name}]")
        lines.extend(f"{k} = {v}" for k, v in body.items())
    return "\n".join(lines) + "\n"
