"""Exact absorbing-chain model of a small machine's run on a split input.

The input ▷xy◁ is cut between x and y.  A megastate is (control state,
work-tape content, work-head position); chain states pair megastates with
the two boundary cells (last of ▷x, first of y◁), and two traps absorb
acceptance and rejection-or-region-confined-looping.  Transition entries
are exact multi-step first-passage probabilities computed by rational
Gaussian elimination over each region's configuration graph, so the chain
serves as an oracle for the simulator rather than the other way round.

Machines are first wrapped into the analysis conventions: a dedicated
initial state sweeps right-to-left from ◁ without touching the work tape,
and every reachable halting configuration must have a clean work tape with
the work head at the left end (validated on the finite graph).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .classical import BLANK, PtmSpec
from .languages import LEFT_END, RIGHT_END

INIT_SWEEP = "init-sweep"
DEFAULT_SPACE_BUDGET = 8
MAX_MEGASTATES = 200
MAX_SPLIT_LEN = 10


class SpaceBudgetError(RuntimeError):
    pass


class ConventionError(ValueError):
    """The machine violates the analysis conventions."""


class NotAbsorbingError(RuntimeError):
    """Transient states retain recurrent mass: looping states were missed."""


Megastate = tuple[str, tuple, int]  # (state, work content, work head)
Config = tuple[str, tuple, int, int]  # megastate fields + input head


def wrap_for_analysis(spec: PtmSpec) -> PtmSpec:
    """Prefix the machine with the right-to-left initial sweep."""
    if INIT_SWEEP in spec.states:
        return spec
    trans = dict(spec.transitions)
    trans[(INIT_SWEEP, LEFT_END, BLANK)] = [(Fraction(1), (spec.start, BLANK, 0, 0))]
    for sym in list(spec.input_alphabet) + [RIGHT_END]:
        trans[(INIT_SWEEP, sym, BLANK)] = [(Fraction(1), (INIT_SWEEP, BLANK, -1, 0))]
    return PtmSpec(
        name=spec.name + "+sweep",
        states=[INIT_SWEEP] + list(spec.states),
        input_alphabet=list(spec.input_alphabet),
        work_alphabet=list(spec.work_alphabet),
        transitions=trans,
        start=INIT_SWEEP,
        accept=spec.accept,
        reject=spec.reject,
        initial_head="right",
    )


def _trim(work: tuple) -> tuple:
    end = len(work)
    while end and work[end - 1] == BLANK:
        end -= 1
    return work[:end]


def _successors(spec: PtmSpec, cfg: Config, tape: str, budget: int):
    state, work, wpos, ipos = cfg
    wsym = work[wpos] if wpos < len(work) else BLANK
    key = (state, tape[ipos], wsym)
    rows = spec.transitions.get(key)
    if rows is None:
        raise ConventionError(f"undefined transition {key!r} reached")
    out = []
    for prob, (s2, w2, di, dw) in rows:
        if w2 == wsym:
            nwork = work
        else:
            ext = list(work) + [BLANK] * (wpos + 1 - len(work))
            ext[wpos] = w2
            nwork = _trim(tuple(ext))
        nwpos = wpos + dw
        if nwpos < 0:
            raise ConventionError("work head moved off the left end")
        if max(len(nwork), nwpos + 1) > budget:
            raise SpaceBudgetError(
                f"work usage exceeded the budget of {budget} cells"
            )
        out.append((prob, (s2, nwork, nwpos, ipos + di)))
    return out


@dataclass
class ConfigGraph:
    spec: PtmSpec
    tape: str
    configs: list[Config]
    index: dict[Config, int]
    edges: list[list[tuple[Fraction, int]]]  # per config
    halting: list[int]  # 0 none, +1 accept, -1 reject
    initial: int

    def looping_flags(self) -> list[bool]:
        """True for configurations from which no halting configuration is
        reachable along positive-probability paths."""
        n = len(self.configs)
        rev = [[] for _ in range(n)]
        for u, outs in enumerate(self.edges):
            for _, v in outs:
                rev[v].append(u)
        can_halt = [h != 0 for h in self.halting]
        stack = [i for i in range(n) if can_halt[i]]
        while stack:
            v = stack.pop()
            for u in rev[v]:
                if not can_halt[u]:
                    can_halt[u] = True
                    stack.append(u)
        return [not c for c in can_halt]


def build_config_graph(
    spec: PtmSpec, w: str, budget: int = DEFAULT_SPACE_BUDGET
) -> ConfigGraph:
    tape = LEFT_END + w + RIGHT_END
    start_pos = 0 if spec.initial_head == "left" else len(w) + 1
    initial: Config = (spec.start, (), 0, start_pos)
    index = {initial: 0}
    configs = [initial]
    edges: list[list[tuple[Fraction, int]]] = []
    halting = []
    queue = [initial]
    while queue:
        cfg = queue.pop()
        state = cfg[0]
        if state == spec.accept:
            halt = 1
        elif state == spec.reject:
            halt = -1
        else:
            halt = 0
        while len(edges) <= index[cfg]:
            edges.append([])
            halting.append(0)
        halting[index[cfg]] = halt
        if halt:
            continue
        outs = []
        for prob, nxt in _successors(spec, cfg, tape, budget):
            if nxt not in index:
                index[nxt] = len(configs)
                configs.append(nxt)
                queue.append(nxt)
            outs.append((prob, index[nxt]))
        edges[index[cfg]] = outs
    return ConfigGraph(
        spec=spec,
        tape=tape,
        configs=configs,
        index=index,
        edges=edges,
        halting=halting,
        initial=0,
    )


def check_conventions(graph: ConfigGraph) -> None:
    for i, cfg in enumerate(graph.configs):
        if graph.halting[i] and (cfg[1] != () or cfg[2] != 0):
            raise ConventionError(
                f"halting configuration {cfg!r} leaves a dirty work tape"
            )


def enumerate_megastates(spec: PtmSpec, space_budget: int) -> list[Megastate]:
    """Structurally possible megastates within the budget, ordered with the
    start megastate first and the reject/accept megastates last."""
    symbols = [BLANK] + [s for s in spec.work_alphabet if s != BLANK]
    contents = set()
    for length in range(space_budget + 1):
        for combo in itertools.product(symbols, repeat=length):
            contents.add(_trim(tuple(combo)))
    start = (spec.start, (), 0)
    reject = (spec.reject, (), 0)
    accept = (spec.accept, (), 0)
    middle = set()
    for state in spec.states:
        for content in contents:
            for pos in range(space_budget + 1):
                mega = (state, content, pos)
                if mega in (start, reject, accept):
                    continue
                middle.add(mega)
    ordered = [start] + sorted(middle) + [reject, accept]
    if len(ordered) > MAX_MEGASTATES * 50:
        raise SpaceBudgetError("megastate enumeration exceeds the desk-scale bound")
    return ordered


@dataclass
class MarkovChain:
    """Row-stochastic 2c-state chain with start 1 and traps 2c-1, 2c."""

    c: int
    matrix: list[list[Fraction]]
    megastates: list[Megastate]
    left_pos: int
    right_pos: int

    def __post_init__(self):
        size = 2 * self.c
        if len(self.matrix) != size:
            raise ValueError("matrix size must be 2c")
        for i, row in enumerate(self.matrix):
            total = sum(row)
            if total != 1:
                raise ValueError(f"row {i + 1} sums to {total}, not 1")
        for trap in (size - 2, size - 1):
            if self.matrix[trap][trap] != 1:
                raise ValueError("trap rows must be self-loops")

    @property
    def size(self) -> int:
        return 2 * self.c

    @property
    def reject_trap(self) -> int:
        return 2 * self.c - 1  # 1-based

    @property
    def accept_trap(self) -> int:
        return 2 * self.c

    def state_label(self, idx1: int) -> str:
        c = self.c
        if idx1 == self.reject_trap:
            return "trap:reject/loop"
        if idx1 == self.accept_trap:
            return "trap:accept"
        if idx1 <= c - 1:
            return f"L{idx1}:{self.megastates[idx1 - 1][0]}"
        j = idx1 - c + 1
        return f"R{j}:{self.megastates[j - 1][0]}"


def _gauss_solve(a_rows: list[list[Fraction]], b_rows: list[list[Fraction]]):
    """Solve A X = B exactly; raises NotAbsorbingError on a singular A."""
    n = len(a_rows)
    m = len(b_rows[0]) if n else 0
    a = [row[:] for row in a_rows]
    b = [row[:] for row in b_rows]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise NotAbsorbingError("singular system: recurrent non-trap mass")
        a[col], a[piv] = a[piv], a[col]
        b[col], b[piv] = b[piv], b[col]
        inv = a[col][col]
        a[col] = [v / inv for v in a[col]]
        b[col] = [v / inv for v in b[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [vr - f * vc for vr, vc in zip(a[r], a[col])]
                b[r] = [vr - f * vc for vr, vc in zip(b[r], b[col])]
    return b


def _region_first_passage(graph: ConfigGraph, interior: set[int]):
    """First-passage probabilities from interior configurations to exits
    (non-interior configs or halts).  Confined mass is left implicit.

    Returns {interior config -> {exit key -> probability}} where exit keys
    are ('cfg', index) for boundary configs and ('halt', ±1).
    """
    interior_alive = []
    exit_keys: list = []
    exit_index: dict = {}
    # restrict to interior configs that can reach an exit
    reach = set()
    rev: dict[int, list[int]] = {}
    direct_exit = set()
    for u in interior:
        if graph.halting[u]:
            continue
        for _, v in graph.edges[u]:
            if v in interior and not graph.halting[v]:
                rev.setdefault(v, []).append(u)
            else:
                direct_exit.add(u)
    stack = list(direct_exit)
    reach = set(direct_exit)
    while stack:
        v = stack.pop()
        for u in rev.get(v, []):
            if u not in reach:
                reach.add(u)
                stack.append(u)
    interior_alive = sorted(reach)
    pos = {u: k for k, u in enumerate(interior_alive)}
    n = len(interior_alive)

    def exit_key(v: int):
        if graph.halting[v]:
            return ("halt", graph.halting[v])
        return ("cfg", v)

    a = [[Fraction(0)] * n for _ in range(n)]
    b_cols: list[list[Fraction]] = []
    for k, u in enumerate(interior_alive):
        a[k][k] = Fraction(1)
        for prob, v in graph.edges[u]:
            if v in interior and not graph.halting[v]:
                if v in pos:
                    a[k][pos[v]] -= prob
                # mass into dead interior configs never exits
            else:
                key = exit_key(v)
                if key not in exit_index:
                    exit_index[key] = len(exit_keys)
                    exit_keys.append(key)
                    for row in b_cols:
                        row.append(Fraction(0))
                while len(b_cols) <= k:
                    b_cols.append([Fraction(0)] * len(exit_keys))
                b_cols[k][exit_index[key]] += prob
    while len(b_cols) < n:
        b_cols.append([Fraction(0)] * len(exit_keys))
    for row in b_cols:
        row.extend([Fraction(0)] * (len(exit_keys) - len(row)))
    if n:
        x = _gauss_solve(a, b_cols)
    else:
        x = []
    out = {}
    for k, u in enumerate(interior_alive):
        out[u] = {
            exit_keys[t]: x[k][t] for t in range(len(exit_keys)) if x[k][t] != 0
        }
    return out


def build_chain(
    spec: PtmSpec, x: str, y: str, budget: int = DEFAULT_SPACE_BUDGET
) -> tuple[MarkovChain, ConfigGraph]:
    """Construct the boundary chain for the wrapped machine on x|y."""
    if len(x) + len(y) > MAX_SPLIT_LEN:
        raise SpaceBudgetError(f"|xy| > {MAX_SPLIT_LEN} exceeds exact-mode bounds")
    wrapped = wrap_for_analysis(spec)
    w = x + y
    graph = build_config_graph(wrapped, w, budget)
    check_conventions(graph)
    left_pos = len(x)
    right_pos = len(x) + 1

    megaset = {(c[0], c[1], c[2]) for c in graph.configs}
    start_mega = (wrapped.start, (), 0)
    reject_mega = (wrapped.reject, (), 0)
    accept_mega = (wrapped.accept, (), 0)
    megaset |= {start_mega, reject_mega, accept_mega}
    middle = sorted(megaset - {start_mega, reject_mega, accept_mega})
    megastates = [start_mega] + middle + [reject_mega, accept_mega]
    c = len(megastates)
    if c > MAX_MEGASTATES:
        raise SpaceBudgetError(f"c(n) = {c} exceeds the exact-mode bound")
    mega_index = {m: k + 1 for k, m in enumerate(megastates)}  # 1-based

    def chain_state(cfg: Config) -> int | None:
        """1-based chain index of a boundary configuration, traps for halts."""
        state, work, wpos, ipos = cfg
        if state == wrapped.accept:
            return 2 * c
        if state == wrapped.reject:
            return 2 * c - 1
        j = mega_index[(state, work, wpos)]
        if j >= c - 1:  # reject/accept megastates handled above
            return None
        if ipos == left_pos:
            return j
        if ipos == right_pos:
            return c + j - 1
        return None

    interior_left = {
        i
        for i, cfg in enumerate(graph.configs)
        if cfg[3] < left_pos and not graph.halting[i]
    }
    interior_right = {
        i
        for i, cfg in enumerate(graph.configs)
        if cfg[3] > right_pos and not graph.halting[i]
    }
    fp_left = _region_first_passage(graph, interior_left)
    fp_right = _region_first_passage(graph, interior_right)

    size = 2 * c
    matrix = [[Fraction(0)] * size for _ in range(size)]

    def add_exit_mass(row, key, prob):
        if key[0] == "halt":
            trap = 2 * c if key[1] > 0 else 2 * c - 1
            row[trap - 1] += prob
            return
        target = chain_state(graph.configs[key[1]])
        if target is None:
            raise RuntimeError("region exit did not land on a boundary cell")
        row[target - 1] += prob

    tape = graph.tape
    for j in range(1, c - 1):  # positional megastates only
        mega = megastates[j - 1]
        for side, pos_, base in (("L", left_pos, j), ("R", right_pos, c + j - 1)):
            row = matrix[base - 1]
            cfg = (mega[0], mega[1], mega[2], pos_)
            if cfg not in graph.index:
                # boundary configuration never arises on this input: the
                # state is unreachable from the chain's start, so its row is
                # a stochastic placeholder
                row[2 * c - 2] += Fraction(1)
                continue
            try:
                succs = _successors(wrapped, cfg, tape, budget)
            except ConventionError:
                row[2 * c - 2] += Fraction(1)  # undefined: treat as rejection
                continue
            for prob, nxt in succs:
                nstate = chain_state(nxt)
                if nstate is not None:
                    row[nstate - 1] += prob
                    continue
                ni = graph.index.get(nxt)
                ipos = nxt[3]
                fp = fp_left if ipos < left_pos else fp_right
                if ni is None or ni not in fp:
                    # interior config that can never exit: confined loop
                    row[2 * c - 2] += prob
                    continue
                for key, q in fp[ni].items():
                    add_exit_mass(row, key, prob * q)
            total = sum(row)
            row[2 * c - 2] += 1 - total  # confined-looping remainder
    # halting megastates as positional states trap immediately
    for base in (c - 1, 2 * c - 2):
        matrix[base - 1][2 * c - 2] = Fraction(1)
    matrix[2 * c - 2][2 * c - 2] = Fraction(1)
    matrix[2 * c - 1][2 * c - 1] = Fraction(1)
    chain = MarkovChain(
        c=c,
        matrix=matrix,
        megastates=megastates,
        left_pos=left_pos,
        right_pos=right_pos,
    )
    return chain, graph


def detect_looping(
    spec: PtmSpec, x: str, y: str, budget: int = DEFAULT_SPACE_BUDGET
) -> set[Config]:
    wrapped = wrap_for_analysis(spec)
    graph = build_config_graph(wrapped, x + y, budget)
    flags = graph.looping_flags()
    return {cfg for i, cfg in enumerate(graph.configs) if flags[i]}


def looping_chain_states(chain: MarkovChain, looping: set[Config]) -> set[int]:
    """1-based positional chain states whose boundary configuration loops."""
    out = set()
    for j in range(1, chain.c - 1):
        mega = chain.megastates[j - 1]
        if (mega[0], mega[1], mega[2], chain.left_pos) in looping:
            out.add(j)
        if (mega[0], mega[1], mega[2], chain.right_pos) in looping:
            out.add(chain.c + j - 1)
    return out


def rewire_looping(chain: MarkovChain, looping_states: set[int]) -> MarkovChain:
    """Divert all transitions into looping states to the reject/loop trap."""
    traps = {chain.reject_trap, chain.accept_trap}
    if looping_states & traps:
        raise ValueError("looping set must exclude the traps")
    matrix = [row[:] for row in chain.matrix]
    trap = chain.reject_trap - 1
    for j in looping_states:
        col = j - 1
        for i in range(len(matrix)):
            if matrix[i][col] != 0:
                matrix[i][trap] += matrix[i][col]
                matrix[i][col] = Fraction(0)
    return MarkovChain(
        c=chain.c,
        matrix=matrix,
        megastates=chain.megastates,
        left_pos=chain.left_pos,
        right_pos=chain.right_pos,
    )


@dataclass
class AbsorptionReport:
    p_accept: Fraction
    p_other: Fraction
    expected_time: Fraction


def absorption(chain: MarkovChain, start: int = 1) -> AbsorptionReport:
    """Exact absorption probabilities and expected steps from the start
    state, over the states reachable from it."""
    size = chain.size
    acc = chain.accept_trap - 1
    rej = chain.reject_trap - 1
    reach = {start - 1}
    stack = [start - 1]
    while stack:
        u = stack.pop()
        for v in range(size):
            if chain.matrix[u][v] != 0 and v not in reach:
                reach.add(v)
                stack.append(v)
    transient = sorted(reach - {acc, rej})
    pos = {u: k for k, u in enumerate(transient)}
    n = len(transient)
    if start - 1 in (acc, rej):
        is_acc = start - 1 == acc
        return AbsorptionReport(
            Fraction(int(is_acc)), Fraction(int(not is_acc)), Fraction(0)
        )
    a = [[Fraction(0)] * n for _ in range(n)]
    b = [[Fraction(0)] * 3 for _ in range(n)]  # accept, reject, ones
    for k, u in enumerate(transient):
        a[k][k] = Fraction(1)
        row = chain.matrix[u]
        for v in range(size):
            p = row[v]
            if p == 0:
                continue
            if v == acc:
                b[k][0] += p
            elif v == rej:
                b[k][1] += p
            else:
                a[k][pos[v]] -= p
        b[k][2] = Fraction(1)
    x = _gauss_solve(a, b)
    k0 = pos[start - 1]
    p_acc, p_rej, t = x[k0][0], x[k0][1], x[k0][2]
    if p_acc + p_rej != 1:
        raise NotAbsorbingError(
            f"absorption probabilities sum to {p_acc + p_rej}, not 1"
        )
    return AbsorptionReport(p_accept=p_acc, p_other=p_rej, expected_time=t)


@dataclass
class ChainAnalysis:
    chain: MarkovChain
    rewired: MarkovChain
    looping_configs: set[Config]
    looping_states: set[int]
    report: AbsorptionReport

    @property
    def c(self) -> int:
        return self.chain.c


def analyze(spec: PtmSpec, x: str, y: str, budget: int = DEFAULT_SPACE_BUDGET):
    """Full pipeline: build, detect looping, rewire, absorb."""
    chain, graph = build_chain(spec, x, y, budget)
    flags = graph.looping_flags()
    looping = {cfg for i, cfg in enumerate(graph.configs) if flags[i]}
    states = looping_chain_states(chain, looping)
    rewired = rewire_looping(chain, states)
    report = absorption(rewired)
    return ChainAnalysis(
        chain=chain,
        rewired=rewired,
        looping_configs=looping,
        looping_states=states,
        report=report,
    )


# --- oracles and fast simulation ----------------------------------------------


def first_passage_enumeration(
    spec: PtmSpec, x: str, y: str, depth: int, budget: int = DEFAULT_SPACE_BUDGET
):
    """Truncated path enumeration from the chain's start configuration: mass
    of first boundary/halt hits within `depth` steps, plus the unresolved
    tail.  Independent oracle for the chain's first row."""
    wrapped = wrap_for_analysis(spec)
    graph = build_config_graph(wrapped, x + y, budget)
    left_pos, right_pos = len(x), len(x) + 1
    start_cfg = (wrapped.start, (), 0, left_pos)
    dist = {start_cfg: Fraction(1)}
    hits: dict = {}
    tape = graph.tape
    for _ in range(depth):
        nxt: dict = {}
        for cfg, mass in dist.items():
            for prob, succ in _successors(wrapped, cfg, tape, budget):
                m = mass * prob
                state = succ[0]
                if state == wrapped.accept:
                    hits[("halt", 1)] = hits.get(("halt", 1), Fraction(0)) + m
                elif state == wrapped.reject:
                    hits[("halt", -1)] = hits.get(("halt", -1), Fraction(0)) + m
                elif succ[3] in (left_pos, right_pos):
                    key = ("cfg", succ)
                    hits[key] = hits.get(key, Fraction(0)) + m
                else:
                    nxt[succ] = nxt.get(succ, Fraction(0)) + m
        dist = nxt
        if not dist:
            break
    tail = sum(dist.values(), Fraction(0))
    return hits, tail


def compile_for_simulation(spec: PtmSpec, w: str, budget: int = 64):
    """Index the reachable configuration graph into numpy arrays for
    vectorized trial runs."""
    graph = build_config_graph(spec, w, budget)
    n = len(graph.configs)
    kmax = max((len(e) for e in graph.edges if e), default=1)
    thresholds = np.full((n, kmax), np.iinfo(np.uint64).max, dtype=np.uint64)
    nxt = np.zeros((n, kmax), dtype=np.int32)
    scale = 1 << 64
    for i, outs in enumerate(graph.edges):
        if not outs:
            nxt[i, :] = i  # halting configs self-loop
            continue
        cum = Fraction(0)
        for k, (prob, v) in enumerate(outs):
            cum += prob
            t = (cum.numerator * scale) // cum.denominator
            thresholds[i, k] = min(t, scale - 1)
            nxt[i, k] = v
        nxt[i, len(outs) :] = nxt[i, len(outs) - 1]
    halting = np.array(graph.halting, dtype=np.int8)
    return graph, thresholds, nxt, halting


def run_batch_compiled(
    spec: PtmSpec,
    w: str,
    trials: int,
    rng,
    step_cap: int,
    budget: int = 64,
    track_looping: bool = False,
):
    """Vectorized Monte Carlo: verdict codes (0 accept, 1 reject, 2 cap),
    per-run step counts, and, when tracking is on, the length of each run's
    non-looping prefix (-1 for runs that never entered a looping
    configuration)."""
    graph, thresholds, nxt, halting = compile_for_simulation(spec, w, budget)
    flags = np.array(graph.looping_flags(), dtype=bool) if track_looping else None
    state = np.zeros(trials, dtype=np.int32)
    steps = np.zeros(trials, dtype=np.int64)
    verdict = np.full(trials, 2, dtype=np.int8)
    prefix = np.full(trials, -1, dtype=np.int64)
    if flags is not None and flags[0]:
        prefix[:] = 0
    active = halting[state] == 0
    for step in range(1, step_cap + 1):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        u = rng.integers(0, 1 << 64, size=len(idx), dtype=np.uint64)
        rows = thresholds[state[idx]]
        k = (u[:, None] >= rows).sum(axis=1)
        state[idx] = nxt[state[idx], k]
        steps[idx] = step
        if flags is not None:
            newly = idx[(prefix[idx] < 0) & flags[state[idx]]]
            prefix[newly] = step
        halted = halting[state[idx]] != 0
        verdict[idx[halted]] = (halting[state[idx[halted]]] < 0).astype(np.int8)
        active[idx[halted]] = False
    return verdict, steps, prefix, graph
