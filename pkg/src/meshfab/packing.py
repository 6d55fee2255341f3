"""Crate packing under freight weight and volume limits.

Volume is a scalar here on purpose: the shipping constraint is billing
weight/volume, not spatial nesting. pack_ffd is the production heuristic;
pack_exact is the branch-and-bound oracle used to validate it on small
instances.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .errors import TooManyItems

EXACT_ITEM_LIMIT = 12


@dataclass(frozen=True)
class FreightItem:
    name: str
    mass_kg: float
    volume_m3: float
    fragile: bool = False

    def __post_init__(self):
        if self.mass_kg <= 0:
            raise ValueError(f"item {self.name!r}: mass must be positive")
        if self.volume_m3 <= 0:
            raise ValueError(f"item {self.name!r}: volume must be positive")

    def dominant_ratio(self, mass_cap: float, volume_cap: float) -> float:
        return max(self.mass_kg / mass_cap, self.volume_m3 / volume_cap)


@dataclass
class Crate:
    capacity_mass_kg: float
    capacity_volume_m3: float
    items: list = field(default_factory=list)
    used_mass_kg: float = 0.0
    used_volume_m3: float = 0.0

    def fits(self, item: FreightItem) -> bool:
        return (self.used_mass_kg + item.mass_kg <= self.capacity_mass_kg + 1e-12
                and self.used_volume_m3 + item.volume_m3 <= self.capacity_volume_m3 + 1e-12)

    def add(self, item: FreightItem):
        self.items.append(item.name)
        self.used_mass_kg += item.mass_kg
        self.used_volume_m3 += item.volume_m3

    def as_dict(self) -> dict:
        return {
            "capacity_mass_kg": self.capacity_mass_kg,
            "capacity_volume_m3": self.capacity_volume_m3,
            "items": list(self.items),
            "used_mass_kg": self.used_mass_kg,
            "used_volume_m3": self.used_volume_m3,
        }


@dataclass(frozen=True)
class CrateManifest:
    crates: list
    unassigned: list   # (item name, reason) for items no empty crate can hold

    def __post_init__(self):
        for crate in self.crates:
            if crate.used_mass_kg > crate.capacity_mass_kg + 1e-9:
                raise ValueError("crate over mass capacity")
            if crate.used_volume_m3 > crate.capacity_volume_m3 + 1e-9:
                raise ValueError("crate over volume capacity")

    @property
    def crate_count(self) -> int:
        return len(self.crates)

    def as_dict(self) -> dict:
        return {
            "crates": [c.as_dict() for c in self.crates],
            "unassigned": [{"name": n, "reason": r} for n, r in self.unassigned],
        }

    def to_json(self) -> bytes:
        return (json.dumps(self.as_dict(), indent=2, sort_keys=False) + "\n").encode()


def _split_infeasible(items, mass_cap, volume_cap):
    feasible, unassigned = [], []
    for item in items:
        if item.mass_kg > mass_cap:
            unassigned.append((item.name, f"mass {item.mass_kg:g} kg exceeds "
                                          f"crate capacity {mass_cap:g} kg"))
        elif item.volume_m3 > volume_cap:
            unassigned.append((item.name, f"volume {item.volume_m3:g} m3 exceeds "
                                          f"crate capacity {volume_cap:g} m3"))
        else:
            feasible.append(item)
    return feasible, unassigned


def pack_ffd(items, crate_mass_cap: float, crate_volume_cap: float) -> CrateManifest:
    """First-fit-decreasing on the dominant mass/volume ratio.

    Items that cannot fit an empty crate are reported unassigned, not
    raised. Ties in the sort order break by name, so output is stable.
    """
    if crate_mass_cap <= 0 or crate_volume_cap <= 0:
        raise ValueError("crate capacities must be positive")
    feasible, unassigned = _split_infeasible(items, crate_mass_cap, crate_volume_cap)
    ordered = sorted(
        feasible,
        key=lambda it: (-it.dominant_ratio(crate_mass_cap, crate_volume_cap), it.name),
    )
    crates: list[Crate] = []
    for item in ordered:
        for crate in crates:
            if crate.fits(item):
                crate.add(item)
                break
        else:
            crate = Crate(capacity_mass_kg=crate_mass_cap,
                          capacity_volume_m3=crate_volume_cap)
            crate.add(item)
            crates.append(crate)
    return CrateManifest(crates=crates, unassigned=unassigned)


def pack_exact(items, crate_mass_cap: float, crate_volume_cap: float) -> CrateManifest:
    """Provably minimal crate count by branch and bound over partitions.

    Bounded to EXACT_ITEM_LIMIT items; raises TooManyItems beyond that.
    Branching assigns items in decreasing size order to each open crate and
    at most one new crate (symmetry break); the incumbent from pack_ffd
    prunes the search.
    """
    if len(items) > EXACT_ITEM_LIMIT:
        raise TooManyItems(
            f"{len(items)} items exceed the exact-search limit of {EXACT_ITEM_LIMIT}"
        )
    if crate_mass_cap <= 0 or crate_volume_cap <= 0:
        raise ValueError("crate capacities must be positive")
    feasible, unassigned = _split_infeasible(items, crate_mass_cap, crate_volume_cap)
    ordered = sorted(
        feasible,
        key=lambda it: (-it.dominant_ratio(crate_mass_cap, crate_volume_cap), it.name),
    )
    if not ordered:
        return CrateManifest(crates=[], unassigned=unassigned)

    incumbent = pack_ffd(items, crate_mass_cap, crate_volume_cap)
    best_count = incumbent.crate_count
    best_assignment = None

    masses = [it.mass_kg for it in ordered]
    volumes = [it.volume_m3 for it in ordered]
    n = len(ordered)
    crate_mass: list[float] = []
    crate_volume: list[float] = []
    assignment = [0] * n

    def branch(i: int):
        nonlocal best_count, best_assignment
        if len(crate_mass) >= best_count:
            return  # bound: already no better than the incumbent
        if i == n:
            best_count = len(crate_mass)
            best_assignment = assignment.copy()
            return
        seen_loads = set()
        for c in range(len(crate_mass)):
            if (crate_mass[c] + masses[i] <= crate_mass_cap + 1e-12
                    and crate_volume[c] + volumes[i] <= crate_volume_cap + 1e-12):
                load = (round(crate_mass[c], 9), round(crate_volume[c], 9))
                if load in seen_loads:
                    continue  # identical crate states are interchangeable
                seen_loads.add(load)
                crate_mass[c] += masses[i]
                crate_volume[c] += volumes[i]
                assignment[i] = c
                branch(i + 1)
                crate_mass[c] -= masses[i]
                crate_volume[c] -= volumes[i]
        # open one new crate (only the first empty one: symmetry break)
        crate_mass.append(masses[i])
        crate_volume.append(volumes[i])
        assignment[i] = len(crate_mass) - 1
        branch(i + 1)
        crate_mass.pop()
        crate_volume.pop()

    branch(0)

    if best_assignment is None:
        return incumbent  # FFD was already optimal and search found no better
    crates = [Crate(capacity_mass_kg=crate_mass_cap,
                    capacity_volume_m3=crate_volume_cap)
              for _ in range(best_count)]
    for i, c in enumerate(best_assignment):
        crates[c].add(ordered[i])
    return CrateManifest(crates=crates, unassigned=unassigned)


# CSV interface -------------------------------------------------------------------

def items_from_csv(data: bytes | str) -> list:
    """Parse a (name, mass_kg, volume_m3, fragile) CSV, header optional."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    items = []
    reader = csv.reader(io.StringIO(text))
    for row in reader:
        if not row or not row[0].strip() or row[0].lstrip().startswith("#"):
            continue
        if row[0].strip().lower() == "name":
            continue  # header
        if len(row) < 3:
            raise ValueError(f"CSV row needs name,mass_kg,volume_m3: {row!r}")
        fragile = len(row) > 3 and row[3].strip().lower() in ("1", "true", "yes")
        items.append(FreightItem(
            name=row[0].strip(),
            mass_kg=float(row[1]),
            volume_m3=float(row[2]),
            fragile=fragile,
        ))
    return items
