"""Real-data style workflow: CSV in, repeated train/test resplits out.

A stand-in dataset is written to a temporary CSV (any numeric CSV with a
header row works the same way), then the harness resamples a 150/50
train/test partition per repetition and compares the statistical and
voting lasso on a logistic target.
"""

import tempfile
from pathlib import Path

import numpy as np

from neurolasso.data import LabeledDataset
from neurolasso.harness import ExperimentConfig, load_csv, render_report, run_experiment, save_csv

r = np.random.default_rng(5)
X = r.normal(size=(200, 8))
eta = 1.5 * X[:, 0] - X[:, 3] + 0.5 * X[:, 5]
label = (r.random(200) < 1 / (1 + np.exp(-eta))).astype(float)

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "clinic.csv"
    save_csv(LabeledDataset(X, label, names=[f"f{j}" for j in range(8)]), path, "label")
    print(path.read_text().splitlines()[0])
    ds = load_csv(path, "label", "logistic")
    print(f"loaded N={ds.n}, p={ds.p}, positives={int(ds.y.sum())}\n")

    cfg = ExperimentConfig(kind="real_logistic", repetitions=3, data_path=str(path),
                           target_column="label", train_size=150, test_size=50,
                           methods=("statistical", "voting"), grid_count=30)
    print(render_report(run_experiment(cfg), "markdown"))
