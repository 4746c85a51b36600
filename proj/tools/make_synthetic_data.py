#!/usr/bin/env python3
"""Generate the bundled synthetic inputs under data/.

Writes a Multi-Grid-like allocation trace and, for seven benchmark profiles,
a configuration space file plus a campaign log whose analysis yields the
profile's (max speedup, all-HBM speedup, 90% HBM usage) row. Every table is
checked by brute force before it is written. Deterministic: re-running
produces byte-identical files.
"""

import itertools
import json
import os
import random

import numpy as np

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data")

MASK64 = (1 << 64) - 1


def site_hash(frames):
    h = 0xCBF29CE484222325
    for frame in frames:
        for c in frame.encode():
            h ^= c
            h = (h * 0x100000001B3) & MASK64
        h = (h * 0x100000001B3) & MASK64
    return h


def hexid(v):
    return "0x%x" % v


DEFAULT_POOLS = [
    {"id": 0, "label": "DDR", "capacity_bytes": 256000000000, "latency_ns": 107.0,
     "read_bw_bytes_per_s": 225e9, "write_bw_bytes_per_s": 180e9},
    {"id": 1, "label": "HBM", "capacity_bytes": 128000000000, "latency_ns": 107.0 * 1.2,
     "bw_bytes_per_s": 700e9},
]


# ---------------------------------------------------------------- MG trace

MG_FRAMES = [
    ["mg.D.x!main+0x3a1", "mg.D.x!setup+0x88", "libc.so.6!malloc"],          # u
    ["mg.D.x!main+0x3c9", "mg.D.x!setup+0x88", "libc.so.6!malloc"],          # r
    ["mg.D.x!main+0x3f2", "mg.D.x!zran3+0x41", "libc.so.6!malloc"],          # v
]
MG_SIZES = [9_208_080_000, 9_208_080_000, 8_043_840_000]
MG_HITS = [470, 450, 70]
MG_UNATTRIBUTED = 10


def make_mg_trace():
    rng = random.Random(2024)
    sites = [site_hash(f) for f in MG_FRAMES]
    bases = [0x7F0000000000, 0x7F0300000000, 0x7F0600000000]
    setup_base = 0x7F0900000000
    lines = ["# synthetic Multi-Grid class D allocation trace"]
    for s, frames in zip(sites, MG_FRAMES):
        for f in frames:
            lines.append("K %s %s" % (hexid(s), f))
    records = []
    # Site 2 is first allocated during setup, released, then allocated again:
    # two events aliased into one site.
    records.append((500, "A %d %s %s %d" % (500, hexid(sites[2]), hexid(setup_base), MG_SIZES[2])))
    records.append((900, "F %d %s" % (900, hexid(setup_base))))
    for i, t in zip((0, 1, 2), (1000, 1010, 1020)):
        records.append((t, "A %d %s %s %d" % (t, hexid(sites[i]), hexid(bases[i]), MG_SIZES[i])))
    t = 2000
    samples = []
    for i, hits in enumerate(MG_HITS):
        for _ in range(hits):
            samples.append((i, bases[i] + rng.randrange(MG_SIZES[i])))
    for _ in range(MG_UNATTRIBUTED):
        samples.append((-1, 0x10000 + rng.randrange(1 << 20)))
    rng.shuffle(samples)
    for owner, addr in samples:
        t += rng.randrange(1000, 5000)
        lat = rng.randrange(95, 140)
        kind = "L" if rng.random() < 0.7 else "S"
        records.append((t, "S %d %s %d %s" % (t, hexid(addr), lat, kind)))
    t_end = t + 1000
    records.append((t_end, "F %d %s" % (t_end, hexid(bases[0]))))
    records.append((t_end + 5, "F %d %s" % (t_end + 5, hexid(bases[1]))))
    # site 2 stays live until exit
    records.sort(key=lambda r: r[0])
    lines += [r[1] for r in records]
    return sites, "\n".join(lines) + "\n"


# ------------------------------------------------------------- campaigns

def subsets_matrix(k):
    return np.array([[(i >> g) & 1 for g in range(k)] for i in range(2 ** k)], dtype=float)


def summary(times, sizes, threshold=0.9):
    """Brute force over all placements: (max, all-fast, threshold fraction)."""
    k = len(sizes)
    speed = times[0] / times
    total = sum(sizes)
    best = max(speed)
    fracs = [sum(sizes[g] for g in range(k) if (i >> g) & 1) / total for i in range(2 ** k)]
    cand = [i for i in range(2 ** k) if speed[i] >= threshold * best]
    choice = min(cand, key=lambda i: (fracs[i], -speed[i], i))
    return best, speed[-1], fracs[choice] * 100.0, choice


def safely_rounds(value, decimals):
    scaled = value * 10 ** decimals
    return abs(scaled - round(scaled)) < 0.3


def run_jitter(t, rng):
    eps = rng.uniform(0.001, 0.004)
    return [round(t * (1 - eps), 6), round(t, 6), round(t * (1 + eps), 6)]


def phase_times(sub, phases, neg, delta):
    """Relative runtime of every placement under a phase model.

    A phase with weight w over groups G saves w*gain when all of G sit in the
    fast pool and only a partial credit otherwise, since the slowest pool a
    phase touches bounds its runtime.
    """
    t = np.ones(sub.shape[0])
    for weight, gain, members, partial in phases:
        cols = sub[:, members]
        full = cols.all(axis=1)
        frac = cols.mean(axis=1)
        t -= weight * gain * np.where(full, 1.0, partial * frac)
    t += delta * sub[:, neg]
    return t


def random_phases(k, neg, rng, fixed=()):
    free = [g for g in range(k) if g != neg and g not in {m for p in fixed for m in p[2]}]
    rng.shuffle(free)
    phases = list(fixed)
    while free:
        take = min(len(free), rng.randint(1, 4))
        members, free = free[:take], free[take:]
        phases.append((rng.uniform(0.1, 1.0), 1.0, members, rng.uniform(0.0, 0.25)))
    return phases


def scale_gains(sub, phases, neg, target, fixed_count):
    """Scale the free phases' gains until the best placement hits target."""
    lo, hi = 0.0, 50.0
    for _ in range(45):
        mid = (lo + hi) / 2
        trial = phases[:fixed_count] + [(w, mid, m, p) for w, _, m, p in phases[fixed_count:]]
        t = phase_times(sub, trial, neg, 0.0)
        if t.min() <= 0.05 or 1 / t.min() > target:
            hi = mid
        else:
            lo = mid
    return phases[:fixed_count] + [(w, lo, m, p) for w, _, m, p in phases[fixed_count:]]


def search_profile(name, footprint, k, target, rng, special=None):
    max_s, all_fast, pct = target
    sub = subsets_matrix(k)
    for attempt in range(20000):
        neg = rng.randrange(1, k)
        fixed = special["phases"](rng) if special else []
        phases = random_phases(k, neg, rng, fixed)
        phases = scale_gains(sub, phases, neg, max_s, len(fixed))
        base = phase_times(sub, phases, neg, 0.0)
        if abs(1 / base.min() - max_s) > 1e-6:
            continue
        delta = 1 / all_fast - base[-1]
        if delta < -1e-9:
            continue
        delta = max(delta, 0.0)
        t = base + delta * sub[:, neg]
        speed = 1 / t
        w = np.array([rng.uniform(0.3, 1.7) for _ in range(k)])
        sizes_f = special["sizes"](w / w.sum()) if special else w / w.sum()
        fracs = sub @ sizes_f
        idx = np.where(speed >= 0.9 * speed.max())[0]
        choice = min(idx, key=lambda i: (fracs[i], -speed[i], i))
        if abs(fracs[choice] * 100 - pct) > 20.0 or not (~sub[choice].astype(bool)).any():
            continue
        members = sub[choice].astype(bool)
        pinned = np.zeros(k, dtype=bool)
        if special:
            pinned[0] = True
        scaled = members & ~pinned
        if not scaled.any():
            continue
        held = sizes_f[members & pinned].sum()
        a = (pct / 100 - held) / sizes_f[scaled].sum()
        b = (1 - pct / 100 - sizes_f[~members & pinned].sum()) / sizes_f[~members & ~pinned].sum()
        if a <= 0 or b <= 0:
            continue
        sizes_f = np.where(pinned, sizes_f, np.where(members, sizes_f * a, sizes_f * b))
        sizes = [int(round(x * footprint)) for x in sizes_f]
        sizes[-1] = footprint - sum(sizes[:-1])
        if min(sizes) <= 0:
            continue
        ref = round(rng.uniform(60, 240), 3)
        runs = [run_jitter(x, rng) for x in ref * t]
        means = np.array([sum(r) / len(r) for r in runs])
        got = summary(means, sizes)
        if (round(got[0], 2) == max_s and round(got[1], 2) == all_fast and round(got[2], 1) == pct
                and safely_rounds(got[0], 2) and safely_rounds(got[1], 2) and safely_rounds(got[2], 1)):
            if special and not special["accept"](sizes, means, footprint):
                continue
            s = np.zeros(k)
            for weight, gain, mem, _ in phases:
                for g in mem:
                    s[g] += weight * gain / len(mem)
            return sizes, s, runs, got
    raise RuntimeError("no table found for " + name)


def write_campaign(name, sizes, shares, runs, group_sites, names=None, failed=None):
    d = os.path.join(ROOT, "campaigns", name)
    os.makedirs(d, exist_ok=True)
    groups = []
    for g, size in enumerate(sizes):
        groups.append({"id": g, "name": (names[g] if names else ""),
                       "sites": [hexid(s) for s in sorted(group_sites[g])],
                       "total_bytes": int(size), "sample_share": float(shares[g]),
                       "rest": bool(names and names[g] == "rest")})
    space = {"version": 1, "pools": DEFAULT_POOLS, "groups": groups}
    with open(os.path.join(d, "space.json"), "w") as f:
        json.dump(space, f, indent=2, sort_keys=True)
        f.write("\n")
    with open(os.path.join(d, "measurements.csv"), "w") as f:
        f.write("placement_index,run_index,seconds,status\n")
        for i, rs in enumerate(runs):
            for r, x in enumerate(rs):
                status = "ok"
                if failed and (i, r) in failed:
                    status = failed[(i, r)]
                f.write("%d,%d,%.6f,%s\n" % (i, r, x, status))


def synthetic_frames(bench, k, members_per_group):
    return [[["%s!alloc_%d_%d+0x%x" % (bench, g, j, 0x40 * (j + 1)), "libc.so.6!malloc"]
             for j in range(members_per_group[g])] for g in range(k)]


def quantized_shares(s, rng, samples=2000):
    raw = np.clip(s, 0, None) + np.array([rng.uniform(0.002, 0.02) for _ in s])
    raw = raw / raw.sum() * rng.uniform(0.93, 0.98)
    return [int(round(x * samples)) for x in raw]


def write_rules_trace(name, sizes, hits, frames, names, samples=2000):
    """Trace plus rules file whose manual grouping reproduces the space."""
    rng = random.Random(99)
    lines = ["# synthetic %s allocation trace" % name]
    site_of = [[site_hash(f) for f in group] for group in frames]
    for group in frames:
        for f in group:
            for frame in f:
                lines.append("K %s %s" % (hexid(site_hash(f)), frame))
    t = 100
    base = 0x7E0000000000
    ranges = []
    for g, size in enumerate(sizes):
        n = len(site_of[g])
        parts = [size // n] * n
        parts[0] += size - sum(parts)
        ranges.append([])
        for site, part in zip(site_of[g], parts):
            lines.append("A %d %s %s %d" % (t, hexid(site), hexid(base), part))
            ranges[g].append((base, part))
            base += (part + 0xFFFFF) & ~0xFFFFF
            t += 10
    picks = []
    for g, h in enumerate(hits):
        for i in range(h):
            b, part = ranges[g][i % len(ranges[g])]
            picks.append(b + rng.randrange(part))
    while len(picks) < samples:
        picks.append(0x1000 + rng.randrange(1 << 16))
    rng.shuffle(picks)
    for addr in picks:
        t += rng.randrange(500, 2000)
        lines.append("S %d %s %d %s" % (t, hexid(addr), rng.randrange(90, 400), "L" if rng.random() < 0.8 else "S"))
    os.makedirs(os.path.join(ROOT, "rules"), exist_ok=True)
    with open(os.path.join(ROOT, "traces", name + "_synthetic.trace"), "w") as f:
        f.write("\n".join(lines) + "\n")
    rules = [{"name": names[g], "sites": [hexid(x) for x in site_of[g]]}
             for g in range(len(sizes)) if names[g] != "rest"]
    with open(os.path.join(ROOT, "rules", name + ".json"), "w") as f:
        json.dump(rules, f, indent=2, sort_keys=True)
        f.write("\n")


PROFILES = [
    # name, footprint bytes, groups, sites per group, (max, all-HBM, 90% usage)
    ("bt", 10_680_000_000, 8, [1, 1, 1, 1, 1, 1, 1, 2], (1.15, 1.14, 55.0)),
    ("lu", 8_650_000_000, 7, [1] * 7, (1.27, 1.27, 58.8)),
    ("sp", 11_190_000_000, 8, [1, 1, 1, 1, 1, 1, 1, 3], (1.79, 1.70, 68.8)),
    ("ua", 7_250_000_000, 8, [1, 1, 1, 1, 1, 1, 1, 49], (1.49, 1.49, 68.8)),
    ("is", 20_000_000_000, 4, [1] * 4, (2.21, 2.18, 60.0)),
    ("kwave", 9_790_000_000, 8, [2, 2, 3, 3, 3, 3, 3, 30], (1.32, 1.32, 76.8)),
]

KWAVE_NAMES = ["p_k", "kappa_fft", "ux_sgx", "uy_sgy", "uz_sgz", "duxdx", "rho", "rest"]


def lu_special():
    # One allocation with ~25% of the data that alone yields most of the gain
    # while staying just under the 90% line.
    def phases(rng):
        return [(1 - 1 / 1.14, 1.0, [0], 0.0)]

    def sizes(sizes_f):
        rest = sizes_f[1:] / sizes_f[1:].sum() * 0.75
        return np.concatenate([[0.25], rest])

    def accept(sizes, means, footprint):
        frac0 = sizes[0] / footprint
        s0 = means[0] / means[1]
        best = max(means[0] / means)
        return 0.2 <= frac0 <= 0.3 and (s0 - 1) >= 0.5 * (best - 1)

    return {"phases": phases, "sizes": sizes, "accept": accept}


def main():
    os.makedirs(os.path.join(ROOT, "traces"), exist_ok=True)
    sites, trace = make_mg_trace()
    with open(os.path.join(ROOT, "traces", "mg_synthetic.trace"), "w") as f:
        f.write(trace)

    # MG: hand-written table; group g holds site g.
    mg_times = {
        0b000: 100.0, 0b001: 60.60, 0b010: 61.73, 0b011: 44.05,
        0b100: 97.00, 0b101: 58.50, 0b110: 59.80, 0b111: 44.25,
    }
    rng = random.Random(7)
    runs = [run_jitter(mg_times[i], rng) for i in range(8)]
    means = np.array([sum(r) / 3 for r in runs])
    got = summary(means, MG_SIZES)
    assert (round(got[0], 2), round(got[1], 2), round(got[2], 1)) == (2.27, 2.26, 69.6), got
    shares = [h / (sum(MG_HITS) + MG_UNATTRIBUTED) for h in MG_HITS]
    write_campaign("mg", MG_SIZES, shares, runs, [[s] for s in sites])
    print("mg", ["%.4f" % x for x in got[:3]])

    for name, footprint, k, members, target in PROFILES:
        rng = random.Random(sum(map(ord, name)))
        special = lu_special() if name == "lu" else None
        sizes, s, runs, got = search_profile(name, footprint, k, target, rng, special)
        hits = quantized_shares(s, rng)
        shares = [h / 2000 for h in hits]
        frames = synthetic_frames(name, k, members)
        group_sites = [[site_hash(f) for f in group] for group in frames]
        names = KWAVE_NAMES if name == "kwave" else (
            [""] * (k - 1) + ["rest"] if members[-1] > 1 else None)
        failed = None
        if name == "ua":
            # one extra run that timed out; the placement keeps its three good runs
            failed = {(37, 3): "timeout"}
            runs[37].append(900.0)
        if name == "kwave":
            write_rules_trace(name, sizes, hits, frames, names)
        write_campaign(name, sizes, shares, runs, group_sites, names, failed)
        print(name, ["%.4f" % x for x in got[:3]], "threshold placement", got[3])


if __name__ == "__main__":
    main()
