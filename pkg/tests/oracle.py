"""Arbitrary-precision reference evaluation of the gadget bounds, term by term in linear space."""

from mpmath import binomial, ceil, mp, mpf

mp.dps = 60


def _rates(noise):
    e, ed = mpf(noise.eps), mpf(noise.eps_nd)
    es, esd = mpf(noise.eps_s), mpf(noise.eps_s_nd)
    em, epsi = mpf(noise.eps_meas), mpf(noise.eps_psi)
    return e, ed, es, esd, em, epsi


def t_min(rp, u, s):
    if u >= rp:
        return 0
    return int(ceil(mpf(rp - u) / (s + 2)))


def mx(cfg, noise):
    e, ed, es, esd, em, _ = _rates(noise)
    n, m, p, r, rp, rq = cfg.n, cfg.m, cfg.p, cfg.r, cfg.r_prime, cfg.r_plus
    h = (m + 1) // 2
    # n(2r+ + 3r + 2) locations, one of them the X measurement of each qubit
    direct = n * (2 * rq + 3 * r + 1) * (e + ed) + n * (em + ed)
    if cfg.is_local:
        return binomial(m, h) * (direct + 32 * n * r * rp * (es + esd) + 8 * n * r * rp * ed) ** h
    if p >= m:
        return binomial(m, h) * (direct + 6 * n * r * rp * ed) ** h
    fanout = int(ceil(mpf(m) / p))
    k_max = int(ceil(mpf(m + 1) / (2 * fanout)))
    total = mpf(0)
    for k in range(k_max + 1):
        rest = max(0, h - fanout * k)
        total += (
            binomial(p, k)
            * (8 * n * r * fanout * ed + 6 * n * r * rp * ed) ** k
            * binomial(m, rest)
            * direct**rest
        )
    return total


def mz(cfg, noise, blocks):
    e, ed, es, esd, em, _ = _rates(noise)
    n, m, r, rp, rq = cfg.n, cfg.m, cfg.r, cfg.r_prime, cfg.r_plus
    p = blocks * m if cfg.is_local else cfg.p
    weight = blocks * m
    prefactor = 2 * rq + (3 if blocks == 2 else 4) * r
    linear = weight * prefactor * ed
    if cfg.is_local:
        linear += weight * (24 if blocks == 2 else 32) * r * rp * esd
    locations = (weight + p + 2 * p * rp) * (e + ed) + p * (em + ed)
    hr, hn = (r + 1) // 2, (n + 1) // 2
    return binomial(n, hn) * (linear + binomial(r, hr) * locations**hr) ** hn


def single_cat(length, rounds, noise, local, misdecode=True):
    e, ed, es, esd, em, _ = _rates(noise)
    bit = 3 * e + em + 2 * ed
    total = mpf(0)
    for s in range(rounds + 1):
        for u in range(rounds + 1):
            t = t_min(rounds, u, s)
            if t < 1 or u + t > rounds:
                continue
            common = binomial(rounds, s) * binomial(rounds, u + t) * binomial(u + t, u)
            if local:
                total += (
                    common
                    * (length * bit + 4 * length * (es + esd)) ** (t + u)
                    * (2 * length * ed + 4 * length * esd) ** s
                )
            else:
                total += (
                    common
                    * binomial(length, 2)
                    * bit ** (2 * t)
                    * (length * bit) ** u
                    * (2 * length * ed) ** s
                )
    if misdecode:
        half = int(ceil(mpf(length) / 2))
        frame = 2 * rounds * ed + (4 * rounds * esd if local else 0)
        total += binomial(length, half) * frame**half
    return total


def cat_prep(cfg, noise, blocks):
    length = blocks * cfg.m if cfg.is_local else cfg.p
    return cfg.n * cfg.r * single_cat(length, cfg.r_prime, noise, cfg.is_local)


def plus_prep(cfg, noise):
    return cfg.m * single_cat(cfg.n, cfg.r_plus, noise, cfg.is_local)


def clamp(value):
    return min(mpf(1), value)


def cnot(cfg, noise):
    return clamp(
        clamp(mz(cfg, noise, 2))
        + clamp(mz(cfg, noise, 3))
        + 2 * clamp(mx(cfg, noise))
        + 4 * clamp(plus_prep(cfg, noise))
        + 3 * clamp(cat_prep(cfg, noise, 2))
        + 3 * clamp(cat_prep(cfg, noise, 3))
    )


def injection(cfg, noise):
    e, ed, es, esd, em, epsi = _rates(noise)
    m, r, rp, rq = cfg.m, cfg.r, cfg.r_prime, cfg.r_plus
    measure_x = r * (e + ed) + (em + ed) + 8 * (r - 1) * rp * (es + esd) + 2 * (m + 1) * r * rp * ed
    cat = (m + 1) * (rp + 2) * (e + ed) + (m + 1) * (em + ed)
    hr = (r + 1) // 2
    measure_zz = r * ed + 8 * rp * (r - 1) * esd + m * (2 * rq + r) * ed + binomial(r, hr) * cat**hr
    return clamp(epsi + measure_x + measure_zz)
