import numpy as np
import pandas as pd

from harness.samples import SampleSet

Z_95 = 1.96


def average_curve(samples: SampleSet) -> pd.DataFrame:
    """Mean output per input with a normal-approximation 95% confidence interval."""
    frame = pd.DataFrame({"input": samples.inputs, "output": samples.outputs.astype(np.float64)})
    stats = frame.groupby("input")["output"].agg(["mean", "std", "count"])
    sem = (stats["std"] / np.sqrt(stats["count"])).fillna(0.0)
    curve = pd.DataFrame(
        {
            "mean": stats["mean"],
            "ci_low": stats["mean"] - Z_95 * sem,
            "ci_high": stats["mean"] + Z_95 * sem,
            "count": stats["count"],
        }
    )
    return curve.reindex(sorted(samples.input_set)).rename_axis("input").reset_index()
