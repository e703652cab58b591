"""Smoke test for the pybkw extension module.

Build first with `pip install --no-build-isolation -e crates/python`.
"""

import csv
import io
import math

import pybkw


def main():
    gain = pybkw.pruned_gain(1601, 2, 25)
    assert abs(gain - 1.8056) < 5e-4, gain
    n_full = pybkw.theory_samples(1601, 2, 8.005, 13)
    assert abs(n_full / 405444.5407156112807640956 - 1) < 1e-9, n_full

    pmf = pybkw.rounded_gaussian_pmf(1.3, 11)
    assert len(pmf) == 11 and abs(sum(pmf) - 1) < 1e-9

    fit = pybkw.cosine_approximation(8.005 * 2 ** 6.5, 1601)
    assert abs(fit["max_abs_deviation"] - 0.00061618995896868713951) < 1e-9
    assert len(fit["g"]) == 1601

    toy = pybkw.Instance.generate(2, 5, 1e-4, 40, seed=3)
    g = toy.solve(2, "LLR")
    assert g.secret == toy.secret, (g, toy.secret)

    inst = pybkw.Instance.generate(6, 101, 0.005, 40000, seed=1)
    tr, basis = inst.transform(seed=2)
    assert len(basis) == 6
    reduced = tr.sample_set().reduce(2, 2, "LF2", seed=3)
    assert reduced.dim == 2 and reduced.offset == 4
    assert math.isclose(reduced.sigma_f, pybkw.noise_after_steps(tr.sigma, 2, False))
    for kind in ("FFT", "FFT_PRUNED", "LLR"):
        guess = reduced.solve(kind)
        assert guess.secret == tr.secret[4:], (kind, guess, tr.secret)

    cfg = "\n".join([
        "q = 11",
        "alpha = 0.05",
        "t = 2",
        "b = 1",
        "k = 1",
        "samples = 300",
        "trials = 4",
        "protocol_floor = false",
    ])
    a = pybkw.run_experiment(config=cfg, seed=5)
    b = pybkw.run_experiment(config=cfg, seed=5, threads=2)
    assert a["csv"] == b["csv"] and a["config_hash"] == b["config_hash"]
    rows = list(csv.DictReader(io.StringIO(a["csv"])))
    assert ",".join(rows[0].keys()) == pybkw.CSV_HEADER
    assert len(rows) == 4 * 2

    try:
        pybkw.Instance.generate(2, 4, 0.1, 10)
    except ValueError as e:
        assert "invalid parameter" in str(e)
    else:
        raise AssertionError("q = 4 accepted")

    print("pybkw smoke test passed")


if __name__ == "__main__":
    main()
