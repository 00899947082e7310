import random

import pytest

from socsim.spec import spec_from_dict


def make_spec(masters, slaves, bus="wishbone", arbiter="round_robin"):
    """masters: [(name, start, [lines])]; slaves: [(name, base, size[, rl, wl])]."""
    doc = {
        "bus": bus,
        "arbiter": arbiter,
        "masters": [{"name": n, "start_address": s, "program": list(p)} for n, s, p in masters],
        "slaves": [
            {"name": s[0], "base": s[1], "size": s[2],
             "read_latency": s[3] if len(s) > 3 else 1, "write_latency": s[4] if len(s) > 4 else 1}
            for s in slaves
        ],
    }
    return spec_from_dict(doc)


def random_spec(rng: random.Random, race_free=True, unmapped=False):
    """A valid spec with 1..3 masters and 1..3 slaves.

    Race-free specs give every master a private window inside one slave;
    with ``unmapped`` some transfers target the hole above the last slave.
    """
    n_m, n_s = rng.randint(1, 3), rng.randint(1, 3)
    slave_size = 0x400
    slaves = [(f"s{j}", j * slave_size, slave_size, rng.randint(1, 3), rng.randint(1, 3)) for j in range(n_s)]
    window = 0x40
    masters = []
    for i in range(n_m):
        start = rng.randrange(n_s) * slave_size + i * window if race_free else 0
        lines = [f"set r1 {rng.randrange(1 << 32):#x}", f"set r2 {rng.randint(1, 9)}"]
        for _ in range(rng.randint(0, 8)):
            off = rng.randrange(window // 4) * 4
            if unmapped and rng.random() < 0.2:
                off = n_s * slave_size - start + 0x100
            op = rng.choice(("write", "read", "add"))
            if op == "write":
                lines.append(f"write {off:#x} r{rng.randrange(8)}")
            elif op == "read":
                lines.append(f"read {off:#x} r{rng.randrange(8)}")
            else:
                lines.append(f"add r{rng.randrange(8)} r1 r2")
        masters.append((f"m{i}", start, lines))
    arbiter = rng.choice(("round_robin", "none")) if n_m == n_s == 1 else "round_robin"
    return make_spec(masters, slaves, rng.choice(("avalon", "wishbone")), arbiter)


@pytest.fixture
def spec_factory():
    return make_spec
