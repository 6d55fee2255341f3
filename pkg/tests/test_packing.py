import itertools

import numpy as np
import pytest

from meshfab.errors import TooManyItems
from meshfab.packing import (
    CrateManifest,
    FreightItem,
    items_from_csv,
    pack_exact,
    pack_ffd,
)


def brute_force_min_crates(items, mass_cap, volume_cap):
    """Independent oracle: enumerate all set partitions, keep feasible minimum."""

    def feasible(group):
        return (sum(i.mass_kg for i in group) <= mass_cap + 1e-12
                and sum(i.volume_m3 for i in group) <= volume_cap + 1e-12)

    def partitions(seq):
        if not seq:
            yield []
            return
        head, rest = seq[0], seq[1:]
        for part in partitions(rest):
            for k in range(len(part)):
                yield part[:k] + [part[k] + [head]] + part[k + 1:]
            yield part + [[head]]

    best = None
    for part in partitions(list(items)):
        if all(feasible(g) for g in part):
            if best is None or len(part) < best:
                best = len(part)
    return best


def simple_items(masses, volume=0.001):
    return [FreightItem(name=f"i{k}", mass_kg=m, volume_m3=volume)
            for k, m in enumerate(masses)]


def test_ffd_reference_instance():
    manifest = pack_ffd(simple_items([40.0, 30.0, 30.0, 20.0]), 60.0, 1.0)
    assert manifest.crate_count == 2
    contents = sorted(tuple(sorted(c.items)) for c in manifest.crates)
    assert contents == [("i0", "i3"), ("i1", "i2")]  # {40,20}, {30,30}
    assert manifest.unassigned == []


def test_oversized_item_reported_not_raised():
    items = simple_items([100.0, 20.0])
    manifest = pack_ffd(items, 60.0, 1.0)
    assert manifest.crate_count == 1
    assert len(manifest.unassigned) == 1
    name, reason = manifest.unassigned[0]
    assert name == "i0"
    assert "exceeds" in reason


def test_empty_item_list():
    manifest = pack_ffd([], 60.0, 1.0)
    assert manifest.crate_count == 0
    assert manifest.unassigned == []


def test_volume_constraint_active():
    # masses trivially fit; volumes force two crates
    items = [
        FreightItem(name="a", mass_kg=1.0, volume_m3=0.7),
        FreightItem(name="b", mass_kg=1.0, volume_m3=0.7),
    ]
    manifest = pack_ffd(items, 100.0, 1.0)
    assert manifest.crate_count == 2


def test_exact_reference_instance():
    manifest = pack_exact(simple_items([40.0, 30.0, 30.0, 20.0]), 60.0, 1.0)
    assert manifest.crate_count == 2


def test_exact_three_full_crates():
    manifest = pack_exact(simple_items([60.0, 60.0, 60.0]), 60.0, 1.0)
    assert manifest.crate_count == 3


def test_exact_no_pair_fits():
    manifest = pack_exact(simple_items([35.0, 35.0, 35.0]), 60.0, 1.0)
    assert manifest.crate_count == 3  # pairwise sums 70 exceed the cap


def test_exact_item_limit():
    with pytest.raises(TooManyItems):
        pack_exact(simple_items([1.0] * 13), 60.0, 1.0)


def test_exact_matches_brute_force_partitions():
    rng = np.random.default_rng(101)
    for _ in range(40):
        n = int(rng.integers(2, 8))
        items = [
            FreightItem(
                name=f"i{k}",
                mass_kg=float(rng.uniform(5.0, 55.0)),
                volume_m3=float(rng.uniform(0.05, 0.9)),
            )
            for k in range(n)
        ]
        exact = pack_exact(items, 60.0, 1.0)
        oracle = brute_force_min_crates(items, 60.0, 1.0)
        assert exact.crate_count == oracle


def test_ffd_never_beats_exact_and_mostly_matches():
    rng = np.random.default_rng(2025)
    matches = 0
    trials = 200
    for _ in range(trials):
        n = int(rng.integers(2, 11))
        items = [
            FreightItem(
                name=f"i{k}",
                mass_kg=float(rng.uniform(5.0, 55.0)),
                volume_m3=float(rng.uniform(0.05, 0.9)),
            )
            for k in range(n)
        ]
        ffd = pack_ffd(items, 60.0, 1.0)
        exact = pack_exact(items, 60.0, 1.0)
        assert ffd.crate_count >= exact.crate_count
        if ffd.crate_count == exact.crate_count:
            matches += 1
        for crate in ffd.crates + exact.crates:
            assert crate.used_mass_kg <= crate.capacity_mass_kg + 1e-9
            assert crate.used_volume_m3 <= crate.capacity_volume_m3 + 1e-9
    assert matches / trials >= 0.8


def test_every_item_exactly_once():
    rng = np.random.default_rng(7)
    items = [
        FreightItem(name=f"i{k}", mass_kg=float(rng.uniform(5, 80)),
                    volume_m3=float(rng.uniform(0.05, 1.4)))
        for k in range(12)
    ]
    manifest = pack_ffd(items, 60.0, 1.0)
    placed = list(itertools.chain.from_iterable(c.items for c in manifest.crates))
    placed += [n for n, _ in manifest.unassigned]
    assert sorted(placed) == sorted(i.name for i in items)


def test_manifest_capacity_invariant_enforced():
    from meshfab.packing import Crate

    crate = Crate(capacity_mass_kg=10.0, capacity_volume_m3=1.0)
    crate.add(FreightItem(name="x", mass_kg=20.0, volume_m3=0.1))
    with pytest.raises(ValueError):
        CrateManifest(crates=[crate], unassigned=[])


def test_csv_roundtrip_and_manifest_json_deterministic():
    csv_text = (
        "name,mass_kg,volume_m3,fragile\n"
        "dhokra_arm,40,0.3,true\n"
        "cane_leg,30,0.8,false\n"
        "# comment line\n"
        "sabai_head,30,0.5,\n"
        "textile_roll,20,0.2,yes\n"
    )
    items = items_from_csv(csv_text)
    assert [i.name for i in items] == ["dhokra_arm", "cane_leg", "sabai_head", "textile_roll"]
    assert items[0].fragile and items[3].fragile and not items[1].fragile
    m1 = pack_ffd(items, 60.0, 1.0)
    m2 = pack_ffd(items, 60.0, 1.0)
    assert m1.to_json() == m2.to_json()
    # no 2-crate split is feasible: every pairing busts mass or volume
    assert m1.crate_count == 3
    assert pack_exact(items, 60.0, 1.0).crate_count == 3
