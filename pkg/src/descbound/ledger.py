"""Itemized bit accounting.

Every counting routine returns a :class:`BitLedger` rather than a bare
total, so each charged bit can be traced to a rubric line.  Totals are
computed, never stored, which keeps the items-sum-to-total invariant true
by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class LedgerItem:
    """One charge: a label, the bits charged, and the rubric that charged them.

    For a section inherited from a baseline, ``bits`` is 0 and
    ``uninherited_bits`` records what the section would have cost.
    """

    label: str
    bits: int
    rubric: str
    uninherited_bits: int | None = None

    def __post_init__(self) -> None:
        if self.bits < 0:
            raise ValueError(f"negative bit charge for {self.label!r}")

    @property
    def effective_uninherited(self) -> int:
        return self.bits if self.uninherited_bits is None else self.uninherited_bits


@dataclass
class BitLedger:
    items: list[LedgerItem] = field(default_factory=list)

    @property
    def total_bits(self) -> int:
        return sum(item.bits for item in self.items)

    @property
    def total_bits_uninherited(self) -> int:
        """Total with baseline inheritance ignored (every section charged)."""
        return sum(item.effective_uninherited for item in self.items)

    def add(self, label: str, bits: int, rubric: str,
            uninherited_bits: int | None = None) -> None:
        self.items.append(LedgerItem(label, bits, rubric, uninherited_bits))

    def extend(self, other: "BitLedger", prefix: str = "") -> None:
        for item in other.items:
            self.items.append(LedgerItem(
                prefix + item.label, item.bits, item.rubric,
                item.uninherited_bits))

    def subtotal(self, prefix: str) -> int:
        return sum(i.bits for i in self.items if i.label.startswith(prefix))

    def to_json_dict(self) -> dict:
        out: dict = {
            "schema": "descbound.ledger/1",
            "items": [],
            "total_bits": self.total_bits,
        }
        for item in self.items:
            entry: dict = {"label": item.label, "bits": item.bits,
                           "rubric": item.rubric}
            if item.uninherited_bits is not None:
                entry["uninherited_bits"] = item.uninherited_bits
            out["items"].append(entry)
        if self.total_bits_uninherited != self.total_bits:
            out["total_bits_uninherited"] = self.total_bits_uninherited
        return out

    def render_text(self) -> str:
        """Fixed-width table, one line per item plus a total line."""
        if not self.items:
            return "(empty ledger)\ntotal: 0 bits"
        width = max(len(i.label) for i in self.items)
        lines = []
        for i in self.items:
            note = ""
            if i.uninherited_bits is not None:
                note = f"  [inherited; {i.uninherited_bits} bits if charged]"
            lines.append(f"{i.label:<{width}}  {i.bits:>6} bits  ({i.rubric}){note}")
        lines.append(f"{'total':<{width}}  {self.total_bits:>6} bits")
        if self.total_bits_uninherited != self.total_bits:
            lines.append(
                f"{'total (no baseline)':<{width}}  "
                f"{self.total_bits_uninherited:>6} bits")
        return "\n".join(lines)
