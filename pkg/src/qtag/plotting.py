"""Sweep figure rendering: fidelities and efficiencies versus angle."""

from __future__ import annotations

from pathlib import Path

from .analysis import SweepResult


def render_sweep_figure(result: SweepResult, path) -> Path:
    """Render a two-panel figure of a sweep to ``path`` (format by suffix)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = result.rows
    thetas = [r.theta for r in rows]
    fig, (ax_f, ax_p) = plt.subplots(2, 1, figsize=(6.4, 7.0), sharex=True)

    ax_f.plot(thetas, [r.f1_direct for r in rows], label="direct, 2 parties")
    ax_f.plot(thetas, [r.f2_direct for r in rows], label="direct, 3 parties")
    ax_f.plot(thetas, [r.f_scheme for r in rows], "--", label="tagged scheme")
    ax_f.set_ylabel("fidelity")
    ax_f.set_ylim(-0.05, 1.05)
    ax_f.grid(alpha=0.3)
    ax_f.legend(loc="best", fontsize=9)

    ax_p.plot(thetas, [r.p1_passive for r in rows], label="tagged, 2 parties")
    ax_p.plot(thetas, [r.p2_passive for r in rows], label="tagged, 3 parties")
    ax_p.plot(thetas, [r.p_active_total for r in rows], "--", label="active, 2 parties")
    ax_p.set_ylabel("success probability")
    ax_p.set_xlabel("misalignment angle (rad)")
    ax_p.set_ylim(-0.05, 1.05)
    ax_p.grid(alpha=0.3)
    ax_p.legend(loc="best", fontsize=9)

    fig.tight_layout()
    target = Path(path)
    fig.savefig(target, dpi=150)
    plt.close(fig)
    return target
