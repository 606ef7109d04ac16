"""Fixed-vocabulary codebook: the referee's primitive symbols and their codes.

A codebook is a set of named categories (math operations, sampling
functions, tensor operations, network layers, optimizers, plus a plain
technical-English word dictionary).  Symbols in a category are coded in
``ceil(log2(category size))`` bits; a category may override that width
explicitly (the word dictionary does: 875 words, charged 10 bits each).

The bundled default lives in ``data/codebook.json``; the ``RVW_CODEBOOK``
environment variable points lookups at a replacement file.
"""

from __future__ import annotations

import difflib
import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path


def ceil_log2(n: int) -> int:
    """Bits needed to index n distinct values (0 for n <= 1)."""
    if n < 1:
        raise ValueError(f"need a positive count, got {n}")
    return (n - 1).bit_length()


class UnknownSymbolError(LookupError):
    """A symbol is not in the codebook (and not otherwise defined)."""

    def __init__(self, symbol: str, suggestions: list[str] | None = None):
        self.symbol = symbol
        self.suggestions = suggestions or []
        msg = f"unknown symbol {symbol!r}"
        if self.suggestions:
            msg += " (did you mean: " + ", ".join(self.suggestions) + "?)"
        super().__init__(msg)


@dataclass(frozen=True)
class CodeEntry:
    """One coded symbol: its category, integer code, and call shape."""

    symbol: str
    category: str
    code: int
    arity: int | None = None          # None = variadic / not applicable
    order_sensitive: bool = False
    hyperparams: tuple[str, ...] = ()  # slot kinds, in signature order


@dataclass(frozen=True)
class Category:
    name: str
    entries: tuple[CodeEntry, ...]
    width_bits: int
    size: int                          # may exceed len(entries) (word dict)
    width_overridden: bool = False


@dataclass
class Codebook:
    categories: dict[str, Category]
    aliases: dict[str, str] = field(default_factory=dict)
    version: int = 1

    def __post_init__(self) -> None:
        self._by_symbol: dict[str, CodeEntry] = {}
        for cat in self.categories.values():
            for entry in cat.entries:
                if entry.symbol in self._by_symbol:
                    raise ValueError(f"duplicate symbol {entry.symbol!r}")
                self._by_symbol[entry.symbol] = entry
        for alias, target in self.aliases.items():
            if target not in self._by_symbol:
                raise ValueError(f"alias {alias!r} points at unknown {target!r}")
            if alias in self._by_symbol:
                raise ValueError(f"alias {alias!r} shadows a real symbol")

    def width(self, category: str) -> int:
        return self.categories[category].width_bits

    def resolve(self, symbol: str) -> CodeEntry | None:
        """Find a symbol (following aliases); None if absent."""
        symbol = self.aliases.get(symbol, symbol)
        return self._by_symbol.get(symbol)

    def lookup(self, symbol: str) -> CodeEntry:
        """Find a symbol or raise :class:`UnknownSymbolError` with suggestions."""
        entry = self.resolve(symbol)
        if entry is None:
            names = list(self._by_symbol) + list(self.aliases)
            raise UnknownSymbolError(
                symbol, difflib.get_close_matches(symbol, names, n=3, cutoff=0.5))
        return entry

    def symbols(self) -> list[str]:
        return list(self._by_symbol)

    def check(self) -> list[str]:
        """Internal consistency problems, as human-readable strings."""
        problems = []
        for cat in self.categories.values():
            want = ceil_log2(cat.size) if cat.size >= 1 else 0
            if not cat.width_overridden and cat.width_bits != want:
                problems.append(
                    f"category {cat.name}: width {cat.width_bits} != "
                    f"ceil(log2({cat.size})) = {want}")
            for pos, entry in enumerate(cat.entries):
                if entry.code != pos:
                    problems.append(
                        f"category {cat.name}: {entry.symbol} has code "
                        f"{entry.code}, expected {pos}")
        return problems

    @classmethod
    def from_json_dict(cls, data: dict) -> "Codebook":
        categories = {}
        for cat in data["categories"]:
            entries = tuple(
                CodeEntry(
                    symbol=e["symbol"],
                    category=cat["name"],
                    code=pos,
                    arity=e.get("arity"),
                    order_sensitive=e.get("order_sensitive", False),
                    hyperparams=tuple(e.get("hyperparams", ())),
                )
                for pos, e in enumerate(cat["entries"]))
            size = cat.get("dictionary_size", len(entries))
            overridden = "width_bits" in cat
            width = cat["width_bits"] if overridden else ceil_log2(max(size, 1))
            categories[cat["name"]] = Category(
                name=cat["name"], entries=entries, width_bits=width,
                size=size, width_overridden=overridden)
        return cls(categories=categories,
                   aliases=dict(data.get("aliases", {})),
                   version=data.get("version", 1))

    def to_json_dict(self) -> dict:
        cats = []
        for cat in self.categories.values():
            c: dict = {
                "name": cat.name,
                "entries": [
                    {k: v for k, v in (
                        ("symbol", e.symbol),
                        ("arity", e.arity),
                        ("order_sensitive", e.order_sensitive or None),
                        ("hyperparams", list(e.hyperparams) or None),
                    ) if v is not None}
                    for e in cat.entries
                ],
            }
            if cat.width_overridden:
                c["width_bits"] = cat.width_bits
            if cat.size != len(cat.entries):
                c["dictionary_size"] = cat.size
            cats.append(c)
        return {"version": self.version, "categories": cats,
                "aliases": dict(self.aliases)}


def load_codebook(path: str | Path) -> Codebook:
    with open(path, encoding="utf-8") as f:
        return Codebook.from_json_dict(json.load(f))


def default_codebook() -> Codebook:
    """The bundled codebook, unless ``RVW_CODEBOOK`` names a replacement."""
    override = os.environ.get("RVW_CODEBOOK")
    if override:
        return load_codebook(override)
    ref = resources.files("descbound.data").joinpath("codebook.json")
    return Codebook.from_json_dict(json.loads(ref.read_text(encoding="utf-8")))
