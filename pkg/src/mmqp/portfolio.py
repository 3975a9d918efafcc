"""Adversarial attack on a mean-covariance portfolio.

The attacker picks x to lower the investor's best achievable value

    f(x, y) = 1/2 x'Hx + x'Wy - 1/2 y'Sigma y + mu'y,   x_i + y_i <= 12 - b,

where mu and Sigma are the mean and covariance of daily arithmetic returns and
W = diag(1/ADV).  H, W and Sigma are rescaled so that their 1-norms are 0.1,
1 and 0.2 times ||mu||_1.
"""
import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NonPositivePrice, ParseError, RaggedRows
from .problem import MinimaxQP
from .solver import OPTIMAL, solve

BUDGET = 12.0
ADV_INV_CAP = 1e12
SIGMA_SHIFT = 1e-10


@dataclass
class MarketData:
    prices: np.ndarray      # T x n
    volumes: np.ndarray     # T x n
    tickers: list

    def __post_init__(self):
        self.prices = np.asarray(self.prices, dtype=float)
        self.volumes = np.asarray(self.volumes, dtype=float)
        if self.prices.ndim != 2 or self.prices.shape != self.volumes.shape:
            raise RaggedRows("prices and volumes must be T x n arrays of equal shape")
        if self.prices.shape[0] < 2:
            raise ParseError("need at least two trading days")
        if len(self.tickers) != self.prices.shape[1]:
            raise RaggedRows("ticker count does not match the number of columns")
        if not np.all(np.isfinite(self.prices)) or np.any(self.prices <= 0):
            raise NonPositivePrice("all prices must be positive")
        if not np.all(np.isfinite(self.volumes)) or np.any(self.volumes < 0):
            raise ParseError("volumes must be finite and nonnegative")

    @property
    def T(self):
        return self.prices.shape[0]

    @property
    def n(self):
        return self.prices.shape[1]

    def returns(self):
        """Daily arithmetic returns, (T-1) x n."""
        p = self.prices
        return (p[1:] - p[:-1]) / p[:-1]


def _read_table(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = []
    for lineno, r in enumerate(rows[1:], start=2):
        if len(r) != len(header):
            raise RaggedRows(f"{path}:{lineno}: expected {len(header)} cells, got {len(r)}")
        try:
            body.append([float(x) for x in r])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: non-numeric cell") from None
    return header, np.array(body, dtype=float).reshape(len(body), len(header))


def ingest_market_csv(prices_path, volumes_path):
    """Read price and volume CSVs (header of tickers, one row per trading day)."""
    tick_p, P = _read_table(prices_path)
    tick_v, V = _read_table(volumes_path)
    if tick_p != tick_v:
        raise ParseError("price and volume files have different tickers")
    if P.shape != V.shape:
        raise RaggedRows("price and volume files have different numbers of days")
    return MarketData(P, V, tick_p)


def write_market_csv(md, prices_path, volumes_path):
    for path, arr in ((prices_path, md.prices), (volumes_path, md.volumes)):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(md.tickers)
            for row in arr:
                w.writerow([repr(float(v)) for v in row])


def synthetic_market(n=20, T=60, seed=0, drift=5e-4, vol=0.02, volume_spread=1.0):
    """Correlated geometric random-walk prices with lognormal volumes.

    A single market factor plus idiosyncratic noise drives returns; average
    daily volume per asset is lognormal with log-sd ``volume_spread``.
    """
    rng = np.random.default_rng(seed)
    beta = rng.uniform(0.5, 1.5, n)
    mu = drift * rng.uniform(-1.0, 2.0, n)
    market = rng.normal(0.0, vol, T - 1)
    idio = rng.normal(0.0, vol, (T - 1, n))
    R = mu + market[:, None] * beta + idio
    prices = np.empty((T, n))
    prices[0] = rng.uniform(20.0, 200.0, n)
    for t in range(1, T):
        prices[t] = prices[t - 1] * (1.0 + R[t - 1])
    adv = np.exp(rng.normal(14.0, volume_spread, n))
    volumes = adv * rng.lognormal(0.0, 0.3, (T, n))
    tickers = [f"A{i + 1:03d}" for i in range(n)]
    return MarketData(prices, volumes, tickers)


@dataclass
class AttackModel:
    mu: np.ndarray
    Sigma_y: np.ndarray     # scaled sample covariance (before the definiteness shift)
    W: np.ndarray
    H_att: np.ndarray
    b: float
    M_mu: float
    sigma_shift: float = 0.0
    clamped: list = field(default_factory=list)

    @property
    def n(self):
        return len(self.mu)

    @property
    def cap(self):
        return BUDGET - self.b

    def norms(self):
        """1-norms of the scaled H, W and Sigma."""
        return {"H": np.linalg.norm(self.H_att, 1), "W": np.linalg.norm(self.W, 1),
                "Sigma_y": np.linalg.norm(self.Sigma_y, 1)}

    def targets(self):
        return {"H": 0.1 * self.M_mu, "W": self.M_mu, "Sigma_y": 0.2 * self.M_mu}

    @property
    def G22(self):
        return -(self.Sigma_y + self.sigma_shift * np.eye(self.n))

    def objective(self, x, y):
        return float(0.5 * x @ self.H_att @ x + x @ self.W @ y + 0.5 * y @ self.G22 @ y + self.mu @ y)


def _scale_to(M, target):
    norm = np.linalg.norm(M, 1)
    if norm == 0.0:
        return M.copy()
    return (target / norm) * M


def build_model(md, b):
    if not 0.0 <= b <= BUDGET:
        raise ValueError(f"b must lie in [0, 12], got {b}")
    R = md.returns()
    mu = R.mean(axis=0)
    dev = R - mu
    Sigma = dev.T @ dev / R.shape[0]
    adv = md.volumes.mean(axis=0)
    inv = np.empty_like(adv)
    clamped = []
    for i, a in enumerate(adv):
        if a <= 1.0 / ADV_INV_CAP:
            inv[i] = ADV_INV_CAP
            clamped.append(md.tickers[i])
        else:
            inv[i] = 1.0 / a
    if clamped:
        warnings.warn(f"zero average daily volume for {clamped}; 1/ADV clamped at {ADV_INV_CAP:g}",
                      RuntimeWarning, stacklevel=2)
    M_mu = float(np.sum(np.abs(mu)))
    H = _scale_to(np.eye(md.n), 0.1 * M_mu)
    W = _scale_to(np.diag(inv), M_mu)
    Sigma = _scale_to(0.5 * (Sigma + Sigma.T), 0.2 * M_mu)
    lam_min = float(np.linalg.eigvalsh(Sigma)[0]) if md.n else 0.0
    floor = SIGMA_SHIFT * max(np.linalg.norm(Sigma, 1), np.finfo(float).tiny)
    shift = max(0.0, floor - lam_min)
    return AttackModel(mu=mu, Sigma_y=Sigma, W=W, H_att=H, b=float(b), M_mu=M_mu,
                       sigma_shift=shift, clamped=clamped)


def attack_problem(model):
    n = model.n
    eye = np.eye(n)
    return MinimaxQP(model.H_att, model.W, model.G22, np.zeros(n), model.mu,
                     eye, eye, -model.cap * np.ones(n), name=f"attack-b{model.b:g}")


def build_attack_problem(md, b):
    model = build_model(md, b)
    return model, attack_problem(model)


def best_response(model, x):
    """Investor's optimal y against ``x`` and the value q(x) = f(x, y)."""
    x = np.asarray(x, dtype=float)
    n = model.n
    sub = MinimaxQP(np.zeros((0, 0)), np.zeros((0, n)), model.G22, np.zeros(0),
                    model.mu + model.W.T @ x, np.zeros((n, 0)), np.eye(n), x - model.cap)
    out = solve(sub, trace=False)
    if out.status != OPTIMAL:
        raise RuntimeError("best response problem reported infeasible")
    y = out.spair.z
    return y, model.objective(x, y), out


def best_response_q(model, x):
    return best_response(model, x)[1]


@dataclass
class AttackResult:
    b: float
    method: str
    x_att: np.ndarray
    q_before: float
    q_after: float
    rho: float
    active_count: int
    outside_K: list = field(default_factory=list)


def relative_reduction(q_before, q_after):
    if q_before == 0.0:
        return 0.0
    return max(0.0, (q_before - q_after) / abs(q_before))


def minimax_attack(model):
    p = attack_problem(model)
    out = solve(p, trace=False)
    if out.status != OPTIMAL:
        raise RuntimeError(f"attack problem is {out.status}")
    return out.spair.z[:model.n], out


def random_attack(model, trials, seed):
    """Best of ``trials`` uniform draws on [b-12, 12-b]^n by q value."""
    rng = np.random.default_rng(seed)
    best_x, best_q = None, math.inf
    for _ in range(trials):
        x = rng.uniform(-model.cap, model.cap, model.n)
        q = best_response_q(model, x)
        if q < best_q:
            best_x, best_q = x, q
    return best_x, best_q


def no_long_attack(model, k=20):
    x = np.zeros(model.n)
    top = np.argsort(-model.mu, kind="stable")[:k]
    x[top] = model.cap
    return x


def parse_b_grid(text):
    """``start:step:end`` (inclusive) or a comma list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"bad b grid {text!r}; expected start:step:end")
        start, step, end = map(float, parts)
        if step <= 0:
            raise ValueError("b grid step must be positive")
        count = int(math.floor((end - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(max(count, 0))]
    return [float(v) for v in text.split(",") if v.strip()]


METHODS = ("minimax", "random", "no-long")


def run_attacks(md, b_grid, methods=METHODS, trials=2000, seed=0, no_long_k=20):
    results = []
    for j, b in enumerate(b_grid):
        model = build_model(md, b)
        y0, q0, _ = best_response(model, np.zeros(model.n))
        for method in methods:
            outside, count = [], None
            if method == "minimax":
                x, out = minimax_attack(model)
                outside = out.warnings.get("violated_outside_K", [])
                count = len(out.spair.alpha)
            elif method == "random":
                x, _ = random_attack(model, trials, seed=(seed, j))
            elif method == "no-long":
                x = no_long_attack(model, no_long_k)
            else:
                raise ValueError(f"unknown attack method {method!r}")
            y, q1, resp = best_response(model, x)
            if count is None:
                count = len(resp.spair.alpha)
            results.append(AttackResult(b=float(b), method=method, x_att=x, q_before=q0,
                                        q_after=q1, rho=relative_reduction(q0, q1),
                                        active_count=count, outside_K=outside))
    return results


def write_results_csv(results, path):
    cols = ["b", "method", "q_before", "q_after", "rho", "active_count"]
    lines = [",".join(cols)]
    for r in results:
        lines.append(f"{r.b:g},{r.method},{r.q_before!r},{r.q_after!r},{r.rho!r},{r.active_count}")
    text = "\n".join(lines) + "\n"
    if path is None:
        return text
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return text
