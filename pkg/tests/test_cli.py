from pathlib import Path

import numpy as np
import pytest

from scalevo.cli import main
from scalevo.core import Scale, write_scales
from scalevo.melody import StepDistribution, write_step_distribution


@pytest.fixture()
def scales_file(tmp_path):
    rng = np.random.default_rng(0)
    scales = []
    regions = ["Africa", "Europe", "East Asia"]
    for i in range(24):
        n = int(rng.integers(3, 6))
        steps = tuple(rng.uniform(80.0, 320.0, size=n))
        scales.append(Scale(steps, scale_type="Vocal",
                            region=regions[i % 3], id=f"s{i}"))
    path = tmp_path / "scales.csv"
    write_scales(path, scales)
    return path


@pytest.fixture()
def dist_file(tmp_path):
    edges = np.arange(0.0, 620.0, 20.0)
    mids = 0.5 * (edges[:-1] + edges[1:])
    probs = np.exp(-((mids - 200.0) ** 2) / (2 * 80.0**2))
    dist = StepDistribution(edges, probs / probs.sum())
    path = tmp_path / "dist.csv"
    write_step_distribution(path, dist)
    return path


def canonical_bytes(directory: Path) -> dict[str, bytes]:
    return {
        p.name: p.read_bytes()
        for p in sorted(Path(directory).iterdir())
        if p.suffix in (".csv", ".txt")
    }


def test_usage_errors_exit_1(tmp_path, capsys):
    assert main(["score"]) == 1  # missing required options
    assert main(["compare", "--scales", "nope.csv", "--model", "of",
                 "--seed", "1", "--out", str(tmp_path)]) == 1  # path not found
    assert main(["score", "--scales", "nope.csv", "--model", "bogus",
                 "--out", str(tmp_path)]) == 1


def test_data_errors_exit_2(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("id,scale_type,region,octave,steps_cents\nx,Vocal,Africa,false,-5\n")
    assert main(["score", "--scales", str(bad), "--model", "of",
                 "--out", str(tmp_path / "o")]) == 2


def test_score_command(scales_file, tmp_path):
    out = tmp_path / "score_out"
    assert main(["score", "--scales", str(scales_file), "--model", "of",
                 "--out", str(out), "--no-figures"]) == 0
    lines = (out / "costs.csv").read_text().splitlines()
    assert lines[0] == "id,cost,n_intervals_used,error"
    assert len(lines) == 25
    assert (out / "manifest.txt").read_text().startswith("command=score")


def test_score_melody_model(scales_file, tmp_path):
    out = tmp_path / "score_melody"
    assert main(["score", "--scales", str(scales_file), "--model", "melody",
                 "--out", str(out), "--no-figures"]) == 0
    lines = (out / "costs.csv").read_text().splitlines()
    assert len(lines) == 25


def test_score_empty_dataset_gives_header_only(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("id,scale_type,region,octave,steps_cents\n")
    out = tmp_path / "empty_out"
    assert main(["score", "--scales", str(empty), "--model", "of",
                 "--out", str(out), "--no-figures"]) == 0
    assert (out / "costs.csv").read_text().splitlines() == [
        "id,cost,n_intervals_used,error"]


def test_score_table_command(tmp_path):
    out = tmp_path / "table_out"
    assert main(["score-table", "--model", "of", "--out", str(out)]) == 0
    lines = (out / "score_table.csv").read_text().splitlines()
    assert lines[0] == "cents,raw,z"
    assert len(lines) == 1252
    assert (out / "score_table.png").exists()
    assert main(["score-table", "--model", "melody", "--out", str(out)]) == 1


def test_score_table_interference(tmp_path):
    out = tmp_path / "seth_table"
    assert main(["score-table", "--model", "sethares", "--out", str(out),
                 "--no-figures"]) == 0
    assert (out / "score_table.csv").exists()


def test_generate_and_rerun_from_manifest(scales_file, dist_file, tmp_path):
    out_a = tmp_path / "gen_a"
    args = ["generate", "--model", "of", "--n-steps", "5", "--beta", "3",
            "--octave", "--population-size", "150", "--n-repeats", "2",
            "--seed", "7", "--dist", str(dist_file), "--out", str(out_a),
            "--no-figures"]
    assert main(args) == 0
    pop_lines = (out_a / "population.csv").read_text().splitlines()
    assert len(pop_lines) == 301  # header + 150 x 2 chains
    assert pop_lines[0].endswith(",cost")

    out_b = tmp_path / "gen_b"
    assert main(["generate", "--config", str(out_a / "manifest.txt"),
                 "--out", str(out_b)]) == 0
    assert canonical_bytes(out_a) == canonical_bytes(out_b)


def test_generate_melody_baseline(dist_file, tmp_path):
    out = tmp_path / "gen_melody"
    assert main(["generate", "--model", "melody", "--n-steps", "4",
                 "--population-size", "50", "--n-repeats", "2", "--seed", "3",
                 "--dist", str(dist_file), "--out", str(out), "--no-figures"]) == 0
    lines = (out / "population.csv").read_text().splitlines()
    assert len(lines) == 101
    assert not lines[0].endswith(",cost")


def test_generate_beta_grid_jsd_table(scales_file, dist_file, tmp_path):
    out = tmp_path / "gen_grid"
    assert main(["generate", "--model", "of", "--n-steps", "4", "--octave",
                 "--beta-grid", "0.1,10,3", "--population-size", "80",
                 "--n-repeats", "1", "--seed", "5", "--dist", str(dist_file),
                 "--ref-scales", str(scales_file), "--out", str(out),
                 "--no-figures"]) == 2  # no octave reference scales in the file
    octave_ref = tmp_path / "octave_ref.csv"
    rng = np.random.default_rng(1)
    refs = []
    for i in range(6):
        steps = rng.uniform(100, 400, size=4)
        steps = steps * 1200.0 / steps.sum()
        refs.append(Scale(tuple(steps), scale_type="Theory", region="Europe",
                          id=f"t{i}"))
    write_scales(octave_ref, refs)
    assert main(["generate", "--model", "of", "--n-steps", "4", "--octave",
                 "--beta-grid", "0.1,10,3", "--population-size", "80",
                 "--n-repeats", "1", "--seed", "5", "--dist", str(dist_file),
                 "--ref-scales", str(octave_ref), "--out", str(out),
                 "--no-figures"]) == 0
    lines = (out / "jsd_beta.csv").read_text().splitlines()
    assert lines[0] == "beta,jsd_degrees,mean_cost"
    assert len(lines) == 4


def test_compare_command_and_manifest_rerun(scales_file, dist_file, tmp_path):
    out_a = tmp_path / "cmp_a"
    args = ["compare", "--scales", str(scales_file), "--model", "of",
            "--dist", str(dist_file), "--beta-grid", "0.1,100,5",
            "--zsamples", "2000", "--seed", "11", "--out", str(out_a)]
    assert main(args) == 0
    assert (out_a / "beta_scan.png").exists()
    assert (out_a / "comparison.csv").read_text().splitlines()[0] == "scale_id,llr,weight"
    assert (out_a / "beta_scan.csv").exists()
    assert (out_a / "logz.csv").exists()
    summary = dict(
        line.split("=", 1) for line in (out_a / "summary.txt").read_text().splitlines()
    )
    assert "beta_star" in summary and "p_value_raw" in summary
    assert summary["beta_at_grid_boundary"] in ("true", "false")

    out_b = tmp_path / "cmp_b"
    assert main(["compare", "--config", str(out_a / "manifest.txt"),
                 "--out", str(out_b)]) == 0
    assert canonical_bytes(out_a) == canonical_bytes(out_b)


def test_compare_rejects_melody(scales_file, tmp_path):
    assert main(["compare", "--scales", str(scales_file), "--model", "melody",
                 "--seed", "1", "--out", str(tmp_path / "x")]) == 1


def test_significance_command(scales_file, dist_file, tmp_path):
    out = tmp_path / "sig"
    assert main(["significance", "--scales", str(scales_file),
                 "--dist", str(dist_file), "--n-resamples", "60",
                 "--seed", "2", "--out", str(out)]) == 0
    assert (out / "significance.png").exists()
    lines = (out / "significance.csv").read_text().splitlines()
    assert lines[0] == ("bin_low,bin_high,empirical_freq,null_freq,p,"
                        "significant_after_BH,direction")
    assert len(lines) > 10


def test_significance_region_split_skips_small_regions(scales_file, dist_file, tmp_path):
    out = tmp_path / "sig_regions"
    assert main(["significance", "--scales", str(scales_file),
                 "--dist", str(dist_file), "--n-resamples", "40",
                 "--region-split", "--min-region-count", "10",
                 "--seed", "2", "--out", str(out), "--no-figures"]) == 0
    # 24 scales over 3 regions: every region has 8 < 10, all skipped
    summary = (out / "summary.txt").read_text()
    assert "region_skipped_Africa=8" in summary
    assert not (out / "significance_Africa.csv").exists()


def test_extract_scale_command(tmp_path):
    rng = np.random.default_rng(4)
    degrees = [0.0, 200.0, 450.0, 700.0]
    cents = np.concatenate([rng.normal(d, 15.0, size=300) for d in degrees])
    rng.shuffle(cents)
    track = tmp_path / "track.csv"
    rows = ["time_s,cents,voiced"] + [
        f"{0.01 * i},{c},1" for i, c in enumerate(cents)
    ]
    track.write_text("\n".join(rows) + "\n")
    out = tmp_path / "extract"
    assert main(["extract-scale", "--track", str(track), "--k", "4",
                 "--seed", "3", "--out", str(out)]) == 0
    assert (out / "gmm_fit.png").exists()
    comp_lines = (out / "components.csv").read_text().splitlines()
    assert len(comp_lines) == 5
    report = dict(
        line.split("=", 1) for line in (out / "report.txt").read_text().splitlines()
    )
    assert report["k"] == "4"
    assert report["equidistant"] in ("true", "false")
    assert main(["extract-scale", "--track", str(track), "--k", "4",
                 "--k-range", "1,5", "--seed", "3",
                 "--out", str(tmp_path / "bad")]) == 1


def test_fit_melody_command_on_62_synthetic_corpora(tmp_path, scales_file):
    mids = np.arange(15) + 0.5
    corpus_paths = []
    for j in range(62):
        counts = np.round(1000 * np.exp(-mids / 2.1) * (1 + 0.03 * j)).astype(int)
        p = tmp_path / f"corpus{j}.csv"
        p.write_text("semitone_bin,count\n" + "\n".join(
            f"{b},{c}" for b, c in enumerate(counts)) + "\n")
        corpus_paths.append(p)
    out = tmp_path / "fit"
    args = ["fit-melody", "--scales", str(scales_file), "--out", str(out),
            "--no-figures"]
    for p in corpus_paths:
        args += ["--corpus", str(p)]
    assert main(args) == 0
    report = dict(
        line.split("=", 1) for line in (out / "params.txt").read_text().splitlines()
    )
    assert report["n_corpora"] == "62"
    assert abs(float(report["i0_mean_semitones"]) - 2.1) < 0.05
    assert (out / "i0_per_corpus.csv").read_text().count("\n") == 63
    assert (out / "step_distribution.csv").exists()
    assert (out / "melody_curve.csv").exists()


def test_fit_melody_requires_corpora(tmp_path, scales_file):
    assert main(["fit-melody", "--scales", str(scales_file),
                 "--out", str(tmp_path / "x")]) == 1


def test_null_range_command(tmp_path):
    out = tmp_path / "null"
    assert main(["null-range", "--n-steps-range", "2,3", "--walkers", "32",
                 "--chain-length", "600", "--burn-in", "200", "--seed", "9",
                 "--out", str(out), "--no-figures"]) == 0
    lines = (out / "null_range.csv").read_text().splitlines()
    assert lines[0].startswith("n_steps,mc_mean_min_step")
    assert len(lines) == 3


def test_figures_written_by_default(scales_file, dist_file, tmp_path):
    out = tmp_path / "figs"
    assert main(["generate", "--model", "of", "--n-steps", "4", "--beta", "1",
                 "--population-size", "60", "--n-repeats", "1", "--seed", "1",
                 "--dist", str(dist_file), "--out", str(out)]) == 0
    assert (out / "step_hist.png").exists()
    assert (out / "degree_hist.png").exists()
