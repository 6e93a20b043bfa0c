"""Four fitters on the same repeated synthetic benchmark.

Every repetition draws a fresh training set (N=50, p=20) and test set, and
all methods share the training data, folds and penalty grid. The report
lists mean (sd) per metric with paired t-test stars against the
statistical lasso. Pass a repetition count as the first argument
(default 5; each repetition takes roughly ten seconds).
"""

import sys

from neurolasso.harness import ExperimentConfig, render_report, run_experiment

reps = int(sys.argv[1]) if len(sys.argv) > 1 else 5
table = run_experiment(ExperimentConfig(kind="synthetic_linear", repetitions=reps, base_seed=1))
print(render_report(table, "markdown"))

stat = table.get("statistical", "precision").mean
vote = table.get("voting", "precision").mean
print(f"voting keeps {vote:.0%} of the noise variables out of the model, "
      f"the statistical lasso {stat:.0%}")
