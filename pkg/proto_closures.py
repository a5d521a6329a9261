"""Scratch comparison of two delayed-boundary closures (not part of the package)."""
import math
import numpy as np
import delaywave as dw

WTS = np.array([1, 8, 28, 56, 70, 56, 28, 8, 1]) / 256.0


def run_closure(J, mu, t_final, closure, lam_req=0.9, probe_dt=0.02, field_times=()):
    ell = 1.0
    h = ell / J
    M = max(1, round(2 * ell / (lam_req * h)))
    dt = 2 * ell / M
    lam = dt / h
    lam2 = lam * lam
    R = M + 8
    x = h * np.arange(J + 1)
    u0 = np.sin(np.pi * x)
    u0[0] = 0.0
    v0 = np.sin(np.pi * x)
    lap = np.zeros(J + 1)
    lap[1:-1] = u0[2:] - 2 * u0[1:-1] + u0[:-2]
    lap[J] = 2 * u0[J - 1] - 2 * u0[J]
    u1 = u0 + dt * v0 + 0.5 * lam2 * lap
    u1[0] = 0.0
    buf = np.zeros(R)
    alpha = -mu / (2.0 - mu)
    buf[0] = (0.0 - v0[J]) / 2.0
    win_b = buf[0]
    ytb = v0[J]
    up, uc = u0, u1
    times, energies, fields = [], [], {}
    total = round(t_final / dt)
    field_steps = {round(t / dt): t for t in field_times}
    for n in range(1, total):
        new = np.empty_like(uc)
        new[1:-1] = 2 * uc[1:-1] - up[1:-1] + lam2 * (uc[2:] - 2 * uc[1:-1] + uc[:-2])
        new[0] = 0.0
        if closure == "ghost":
            rhs_free = 2 * uc[J] - up[J] + 2 * lam2 * (uc[J - 1] - uc[J])
            if n >= M:
                idx = [(n - M + k - 4) % R for k in range(9)]
                d = float(np.dot(WTS, buf[idx]))
                new[J] = (rhs_free - 2 * lam * alpha * uc[J] + 4 * lam2 * h * alpha * d) / (1 - 2 * lam * alpha)
                g = alpha * ((new[J] - uc[J]) / dt + 2 * d)
            else:
                new[J] = rhs_free
                g = 0.0
            buf[n % R] = (g - (new[J] - up[J]) / (2 * dt)) / 2.0
        else:  # upwind characteristic boundary
            win_jm1 = 0.5 * ((uc[J] - uc[J - 2]) / (2 * h) - (new[J - 1] - up[J - 1]) / (2 * dt))
            win_new = win_b - lam * (win_b - win_jm1)
            if n >= M:
                idx = [(n - M + k - 4) % R for k in range(9)]
                d = float(np.dot(WTS, buf[idx]))
                g = mu * (win_new - d)
                yt_new = g - 2.0 * win_new
                new[J] = uc[J] + 0.5 * dt * (ytb + yt_new)
                buf[n % R] = win_new
            else:
                new[J] = 2 * uc[J] - up[J] + 2 * lam2 * (uc[J - 1] - uc[J])
                yt_new = (new[J] - up[J]) / (2 * dt)
                win_new = (0.0 - yt_new) / 2.0
                buf[n % R] = win_new
            win_b, ytb = win_new, yt_new
        up, uc = uc, new
        if n in field_steps:
            fields[field_steps[n]] = uc.copy()
        t = (n + 0.5) * dt
        k = round(t / probe_dt)
        if abs(t - k * probe_dt) <= dt / 2 and (not times or k * probe_dt > times[-1]):
            v = (uc - up) / dt
            w = 0.5 * (uc + up)
            ux = np.empty_like(w)
            ux[1:-1] = (w[2:] - w[:-2]) / (2 * h)
            ux[0] = (-3 * w[0] + 4 * w[1] - w[2]) / (2 * h)
            ux[-1] = (3 * w[-1] - 4 * w[-2] + w[-3]) / (2 * h)
            dens = ux * ux + v * v
            times.append(k * probe_dt)
            energies.append(0.5 * h * (np.add.reduce(dens[1:-1]) + 0.5 * (dens[0] + dens[-1])))
    return np.array(times), np.array(energies), fields, h


def fit_rate(times, energies, t_a, t_b):
    trace = dw.EnergyTrace(times, np.maximum(energies, 0.0), {"config": {"ell": 1.0}})
    return dw.fit_with_fallback(trace, t_a, t_b)


if __name__ == "__main__":
    import sys

    what = sys.argv[1] if len(sys.argv) > 1 else "rates"
    if what == "rates":
        for closure in ("ghost", "upwind"):
            print(f"--- closure {closure}: fitted rates J=1000, window [10,40]")
            for mu in (0.2, 0.3, 0.5, 0.7):
                t, e, _, _ = run_closure(1000, mu, 41.0, closure)
                fit = fit_rate(t, e, 10.0, 40.0)
                om = dw.predicted_decay_rate(mu, 1.0)
                rel = abs(fit.rate - (-om)) / om
                print(f"  mu={mu}: rate {fit.rate:+.5f} target {-om:+.5f} rel {rel:.2%} ({fit.method})")
    elif what == "conv":
        trace_cfg = dw.SimConfig(mu=0.5, boundary="delayed", t_final=21.0, n_per_half=4000)
        trace = dw.build_trace(trace_cfg)
        sample_ts = [2.0 * k for k in range(1, 11)]
        for closure in ("ghost", "upwind"):
            errs = []
            for J in (250, 500, 1000, 2000):
                t, e, fields, h = run_closure(J, 0.5, 21.0, closure, field_times=sample_ts)
                worst = 0.0
                for tt, u in fields.items():
                    xs = h * np.arange(J + 1)
                    y = dw.eval_field(trace, xs, tt)[0]
                    diff = u - y
                    worst = max(worst, math.sqrt(float(np.trapezoid(diff * diff, dx=h))))
                errs.append(worst)
            order = dw.convergence_order(errs, [1.0 / J for J in (250, 500, 1000, 2000)])
            print(f"--- closure {closure}: errors {['%.3e' % e for e in errs]} order {order:.3f}")
    elif what == "regimes":
        for closure in ("ghost", "upwind"):
            t, e, _, _ = run_closure(1000, -0.1, 41.0, closure)
            i4 = np.argmin(np.abs(t - 4.0))
            growth = e[-1] > e[i4]
            t2, e2, _, _ = run_closure(1000, 1.5, 41.0, closure)
            fit = fit_rate(t2, e2, 10.0, 40.0)
            print(f"--- closure {closure}: mu=-0.1 E(40)>E(4): {growth} (E4={e[i4]:.3e}, E40={e[-1]:.3e}); "
                  f"mu=1.5 rate {fit.rate:+.4f} (physical +0.405)")
