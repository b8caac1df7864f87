#!/usr/bin/env python3
"""Regenerate the benchmark .dpomdp files under data/benchmarks/.

Each domain is described as a per-(state, joint action) generator; the script
writes dense-enough .dpomdp text (explicit non-zero T/O rows, R(s,a) rows)
and, with --check, prints the centralized fully-observable MDP value from b0
as a sanity upper bound.

    python3 tools/make_benchmarks.py [--out data/benchmarks] [--check]
"""
import argparse
import itertools
import os
import sys


class Domain:
    def __init__(self, name, agents, states, actions, observations, discount, start):
        self.name = name
        self.agents = agents
        self.states = states
        self.actions = actions            # per-agent list of names
        self.observations = observations  # per-agent list of names
        self.discount = discount
        self.start = start                # list of probabilities
        self.header_comment = ""

    def joint_actions(self):
        return list(itertools.product(*[range(len(a)) for a in self.actions]))

    def joint_observations(self):
        return list(itertools.product(*[range(len(o)) for o in self.observations]))


def fmt(p):
    s = repr(float(p))
    return s[:-2] if s.endswith(".0") else s


def write_dpomdp(dom, trans, obs, reward, path):
    """trans(s, ja) -> {s': p}; obs(ja, s') -> {jo: p}; reward(s, ja) -> r."""
    lines = []
    if dom.header_comment:
        lines += ["# " + l for l in dom.header_comment.strip().splitlines()]
    lines.append(f"agents: {dom.agents}")
    lines.append(f"discount: {dom.discount}")
    lines.append("values: reward")
    lines.append("states: " + " ".join(dom.states))
    lines.append("start:")
    lines.append(" ".join(fmt(p) for p in dom.start))
    lines.append("actions:")
    for a in dom.actions:
        lines.append(" ".join(a))
    lines.append("observations:")
    for o in dom.observations:
        lines.append(" ".join(o))

    def jname(names, idx):
        return " ".join(names[k][i] for k, i in enumerate(idx))

    for ja in dom.joint_actions():
        an = jname(dom.actions, ja)
        for s, sn in enumerate(dom.states):
            row = trans(s, ja)
            assert abs(sum(row.values()) - 1.0) < 1e-12, (dom.name, s, ja)
            for s2, p in sorted(row.items()):
                if p > 0:
                    lines.append(f"T: {an} : {sn} : {dom.states[s2]} : {fmt(p)}")
    for ja in dom.joint_actions():
        an = jname(dom.actions, ja)
        for s2, sn in enumerate(dom.states):
            row = obs(ja, s2)
            assert abs(sum(row.values()) - 1.0) < 1e-12, (dom.name, ja, s2)
            for jo, p in sorted(row.items()):
                if p > 0:
                    lines.append(f"O: {an} : {sn} : {jname(dom.observations, jo)} : {fmt(p)}")
    for ja in dom.joint_actions():
        an = jname(dom.actions, ja)
        for s, sn in enumerate(dom.states):
            r = reward(s, ja)
            if r != 0:
                lines.append(f"R: {an} : {sn} : * : * : {fmt(r)}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def mmdp_value(dom, trans, reward, iters=2000):
    ns = len(dom.states)
    jas = dom.joint_actions()
    v = [0.0] * ns
    for _ in range(iters):
        v = [max(reward(s, ja) + dom.discount * sum(p * v[t] for t, p in trans(s, ja).items())
                 for ja in jas) for s in range(ns)]
    return sum(dom.start[s] * v[s] for s in range(ns))


# --------------------------------------------------------------------------
# Decentralized tiger

def dectiger():
    dom = Domain("dectiger", 2, ["tiger-left", "tiger-right"],
                 [["listen", "open-left", "open-right"]] * 2,
                 [["hear-left", "hear-right"]] * 2, 0.9, [0.5, 0.5])
    dom.header_comment = "Decentralized tiger problem (two listeners, two doors)."

    def trans(s, ja):
        if ja == (0, 0):
            return {s: 1.0}
        return {0: 0.5, 1: 0.5}

    def obs(ja, s2):
        if ja != (0, 0):
            return {jo: 0.25 for jo in dom.joint_observations()}
        out = {}
        for jo in dom.joint_observations():
            p = 1.0
            for o in jo:
                p *= 0.85 if o == s2 else 0.15
            out[jo] = p
        return out

    # tiger-left table; tiger-right mirrors doors
    table = {
        (0, 0): -2, (0, 1): -101, (1, 0): -101, (0, 2): 9, (2, 0): 9,
        (1, 1): -50, (2, 2): 20, (1, 2): -100, (2, 1): -100,
    }

    def reward(s, ja):
        if s == 1:
            swap = {0: 0, 1: 2, 2: 1}
            ja = tuple(swap[a] for a in ja)
        return table[ja]

    return dom, trans, obs, reward


# --------------------------------------------------------------------------
# Recycling robots: battery high/low per robot, small cans alone, big can
# together.

def recycling():
    names = [f"{a}-{b}" for a in ("high", "low") for b in ("high", "low")]
    dom = Domain("recycling", 2, names,
                 [["search-big", "search-small", "recharge"]] * 2,
                 [["obs-high", "obs-low"]] * 2, 0.9, [1.0, 0.0, 0.0, 0.0])
    dom.header_comment = "Two recycling robots; battery level per robot; big can needs both."

    def robot(level, action):
        # returns {(next level, depleted): p}; level 0 = high, 1 = low
        if action == 2:
            return {(0, False): 1.0}
        if action == 0:
            return {(0, False): 0.5, (1, False): 0.5} if level == 0 else \
                   {(1, False): 0.7, (0, True): 0.3}
        return {(0, False): 0.8, (1, False): 0.2} if level == 0 else \
               {(1, False): 0.8, (0, True): 0.2}

    def split(s):
        return s // 2, s % 2

    def trans(s, ja):
        l1, l2 = split(s)
        out = {}
        for (n1, _), p1 in robot(l1, ja[0]).items():
            for (n2, _), p2 in robot(l2, ja[1]).items():
                t = n1 * 2 + n2
                out[t] = out.get(t, 0.0) + p1 * p2
        return out

    def obs(ja, s2):
        l1, l2 = split(s2)
        out = {}
        for o1 in (0, 1):
            for o2 in (0, 1):
                p = (0.9 if o1 == l1 else 0.1) * (0.9 if o2 == l2 else 0.1)
                out[(o1, o2)] = p
        return out

    def reward(s, ja):
        levels = split(s)
        r = 0.0
        if ja == (0, 0):
            r += 5.0
        for k in (0, 1):
            if ja[k] == 1:
                r += 2.0
            for (_, dep), p in robot(levels[k], ja[k]).items():
                if dep:
                    r -= 10.0 * p
        return r

    return dom, trans, obs, reward


# --------------------------------------------------------------------------
# Meeting in a 3x3 grid: meet in the top-left or bottom-right corner.

def grid3x3():
    cells = [(r, c) for r in range(3) for c in range(3)]
    names = [f"a{p}-b{q}" for p in range(9) for q in range(9)]
    moves = ["up", "down", "left", "right", "stay"]
    start = [0.0] * 81
    start[2 * 9 + 6] = 1.0  # top-right and bottom-left
    dom = Domain("grid3x3", 2, names, [moves] * 2,
                 [[f"cell{p}" for p in range(9)]] * 2, 0.9, start)
    dom.header_comment = "Two agents meeting in a corner (top-left or bottom-right) of a 3x3 grid."
    goals = {0, 8}
    success = 0.5

    def move(p, a):
        r, c = cells[p]
        dr, dc = [(-1, 0), (1, 0), (0, -1), (0, 1), (0, 0)][a]
        nr, nc = r + dr, c + dc
        if a == 4 or not (0 <= nr < 3 and 0 <= nc < 3):
            return {p: 1.0}
        q = nr * 3 + nc
        return {q: success, p: 1.0 - success}

    def trans(s, ja):
        p, q = divmod(s, 9)
        out = {}
        for p2, x in move(p, ja[0]).items():
            for q2, y in move(q, ja[1]).items():
                t = p2 * 9 + q2
                out[t] = out.get(t, 0.0) + x * y
        return out

    def obs(ja, s2):
        p, q = divmod(s2, 9)
        return {(p, q): 1.0}

    def reward(s, ja):
        p, q = divmod(s, 9)
        return 1.0 if p == q and p in goals else 0.0

    return dom, trans, obs, reward


# --------------------------------------------------------------------------
# Cooperative box pushing: 4-column corridor, two small boxes above columns
# 0 and 3, a large box above columns 1-2.  Agents live on the bottom row,
# agent 1 always left of agent 2.  96 configurations + 4 "box delivered"
# states that reset to the start configuration.

def boxpushing():
    dirs = "NESW"
    configs = []
    for p1 in range(4):
        for p2 in range(p1 + 1, 4):
            for d1 in range(4):
                for d2 in range(4):
                    configs.append((p1, d1, p2, d2))
    extra = ["small-left-done", "small-right-done", "large-done", "smalls-done"]
    names = [f"p{p1}{dirs[d1]}-p{p2}{dirs[d2]}" for (p1, d1, p2, d2) in configs] + extra
    index = {c: i for i, c in enumerate(configs)}
    start_cfg = (0, 1, 3, 3)  # facing each other
    start = [0.0] * len(names)
    start[index[start_cfg]] = 1.0
    acts = ["turn-left", "turn-right", "move", "stay"]
    obsn = ["empty", "wall", "agent", "small-box", "large-box"]
    dom = Domain("boxpushing", 2, names, [acts] * 2, [obsn] * 2, 0.9, start)
    dom.header_comment = "Cooperative box pushing on a 4-column corridor (two small boxes, one large box)."
    success = 0.9
    S_LEFT, S_RIGHT, L_DONE, SMALLS = 96, 97, 98, 99

    def front(pos, d, other):
        if d == 0:
            return 3 if pos in (0, 3) else 4
        if d == 2:
            return 1
        nxt = pos + (1 if d == 1 else -1)
        if nxt < 0 or nxt > 3:
            return 1
        return 2 if nxt == other else 0

    def outcomes(s, ja):
        """{(next state, reward-contribution)}: p"""
        if s >= 96:
            return {(index[start_cfg], 0.0): 1.0}
        p1, d1, p2, d2 = configs[s]
        out = {}
        for ok1 in (True, False):
            for ok2 in (True, False):
                pr = (success if ok1 else 1 - success) * (success if ok2 else 1 - success)
                a1 = ja[0] if ok1 else 3
                a2 = ja[1] if ok2 else 3
                r = -0.2
                n1, e1, n2, e2 = p1, d1, p2, d2
                pushed_small = set()
                # large box: both must push it together
                push_large = a1 == 2 and a2 == 2 and d1 == 0 and d2 == 0 and p1 == 1 and p2 == 2
                if push_large:
                    nxt = L_DONE
                    r += 100.0
                else:
                    for k, (pos, d, a, oth) in enumerate(((p1, d1, a1, p2), (p2, d2, a2, p1))):
                        nd, npos = d, pos
                        if a == 0:
                            nd = (d + 3) % 4
                        elif a == 1:
                            nd = (d + 1) % 4
                        elif a == 2:
                            f = front(pos, d, oth)
                            if d == 0 and pos in (0, 3):
                                pushed_small.add(pos)
                            elif f == 0:
                                npos = pos + (1 if d == 1 else -1)
                            elif f in (1, 4):
                                r -= 5.0
                        if k == 0:
                            n1, e1 = npos, nd
                        else:
                            n2, e2 = npos, nd
                    if pushed_small:
                        r += 10.0 * len(pushed_small)
                        nxt = SMALLS if len(pushed_small) == 2 else (S_LEFT if 0 in pushed_small else S_RIGHT)
                    else:
                        if n1 == n2 or n1 > n2:  # collision: nobody moves
                            n1, n2 = p1, p2
                        nxt = index[(n1, e1, n2, e2)]
                key = (nxt, r)
                out[key] = out.get(key, 0.0) + pr
        return out

    def trans(s, ja):
        out = {}
        for (t, _), p in outcomes(s, ja).items():
            out[t] = out.get(t, 0.0) + p
        return out

    def reward(s, ja):
        return sum(p * r for (_, r), p in outcomes(s, ja).items())

    def obs(ja, s2):
        if s2 >= 96:
            return {(0, 0): 1.0}
        p1, d1, p2, d2 = configs[s2]
        return {(front(p1, d1, p2), front(p2, d2, p1)): 1.0}

    return dom, trans, obs, reward


# --------------------------------------------------------------------------
# Mars rovers on a 2x2 grid; sites at cells 0 and 3 must be drilled jointly,
# sites at cells 1 and 2 can be sampled by one rover.

def marsrover():
    names = []
    for p in range(4):
        for q in range(4):
            for m in range(16):
                names.append(f"r{p}-r{q}-d{m:04b}")
    start = [0.0] * 256
    start[(0 * 4 + 3) * 16] = 1.0
    acts = ["up", "down", "left", "right", "drill", "sample"]
    obsn = [f"cell{c}-{st}" for c in range(4) for st in ("todo", "done")]
    dom = Domain("marsrover", 2, names, [acts] * 2, [obsn] * 2, 0.9, start)
    dom.header_comment = "Two Mars rovers on a 2x2 grid; cells 0/3 need joint drilling, cells 1/2 sampling."
    drill_sites = {0, 3}
    success = 0.95

    def split(s):
        pq, m = divmod(s, 16)
        p, q = divmod(pq, 4)
        return p, q, m

    def move(p, a):
        r, c = divmod(p, 2)
        dr, dc = [(-1, 0), (1, 0), (0, -1), (0, 1)][a]
        nr, nc = r + dr, c + dc
        if not (0 <= nr < 2 and 0 <= nc < 2):
            return {p: 1.0}
        return {nr * 2 + nc: success, p: 1.0 - success}

    def outcomes(s, ja):
        p, q, m = split(s)
        if m == 15:
            return {((0 * 4 + 3) * 16, 0.0): 1.0}
        r = 0.0
        nm = m
        a1, a2 = ja
        if a1 == 4 and a2 == 4 and p == q and p in drill_sites and not (m >> p) & 1:
            nm |= 1 << p
            r += 10.0
        else:
            sampled = set()
            for pos, a in ((p, a1), (q, a2)):
                if a == 5:
                    if pos not in drill_sites and not (m >> pos) & 1:
                        sampled.add(pos)
                    else:
                        r -= 1.0
                elif a == 4:
                    r -= 0.5
            for pos in sampled:
                nm |= 1 << pos
                r += 3.0
        for a in ja:
            if a < 4:
                r -= 0.1
        out = {}
        mp = move(p, a1) if a1 < 4 else {p: 1.0}
        mq = move(q, a2) if a2 < 4 else {q: 1.0}
        for p2, x in mp.items():
            for q2, y in mq.items():
                key = ((p2 * 4 + q2) * 16 + nm, r)
                out[key] = out.get(key, 0.0) + x * y
        return out

    def trans(s, ja):
        out = {}
        for (t, _), pr in outcomes(s, ja).items():
            out[t] = out.get(t, 0.0) + pr
        return out

    def reward(s, ja):
        return sum(pr * r for (_, r), pr in outcomes(s, ja).items())

    def obs(ja, s2):
        p, q, m = split(s2)
        return {(p * 2 + ((m >> p) & 1), q * 2 + ((m >> q) & 1)): 1.0}

    return dom, trans, obs, reward


DOMAINS = {
    "dectiger": dectiger,
    "recycling": recycling,
    "grid3x3": grid3x3,
    "boxpushing": boxpushing,
    "marsrover": marsrover,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data", "benchmarks"))
    ap.add_argument("--check", action="store_true")
    ap.add_argument("domains", nargs="*", default=list(DOMAINS))
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    for name in args.domains:
        dom, trans, obs, reward = DOMAINS[name]()
        path = os.path.join(args.out, name + ".dpomdp")
        write_dpomdp(dom, trans, obs, reward, path)
        msg = f"{name}: |S|={len(dom.states)} |A|={[len(a) for a in dom.actions]} " \
              f"|O|={[len(o) for o in dom.observations]} -> {path}"
        if args.check:
            msg += f"  mmdp={mmdp_value(dom, trans, reward, 300):.3f}"
        print(msg)
    return 0


if __name__ == "__main__":
    sys.exit(main())
