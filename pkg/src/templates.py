"""Text templates for human-readable reports."""

SESSION_SUMMARY = """\
Performance test: {technique}
{rule}
Stop location:   {stop_location} samples ({rounds} rounds)
Terminated by:   {terminated_by}
Final verdict:   {verdict}
{percentile_lines}
"""

EVALUATION_SUMMARY = """\
Evaluation against ground truth ({ground_truth_size} samples)
{rule}
Samples graded:  {samples}
Accuracy:        {accuracy:.2f}%
{reliability_lines}
"""

EXPERIMENT_SUMMARY = """\
Experiment: {technique} on {workload} (seed {seed})
{rule}
Stop location:   {stop_location} samples
Terminated by:   {terminated_by}
Accuracy:        {accuracy:.2f}%
{reliability_lines}
"""

AGGREGATE_HEADER = "{technique:<14} {experiments:>5} {failures:>5} {accuracy:>9} {repetitions:>12}  {reliability}"

COMPARISON_SUMMARY = """\
Strategy comparison: {cells} experiments, {failures} failures
{rule}
{table}
"""

SWEEP_SUMMARY = """\
Parameter sweep over {parameter}
{rule}
{table}
"""

RELIABILITY_LINE = "Reliable at p{percent:<3d}  {flag}"
PERCENTILE_LINE = "p{percent:<3d} latency:    {value:.3f} ms"
RULE = "=" * 60
