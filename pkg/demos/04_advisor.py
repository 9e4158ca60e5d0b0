"""Rank a handful of generated masking configurations."""
from maskadvisor import advise, generate_configurations, provider_inputs
from maskadvisor.advisor import truth_report
from maskadvisor.datasets import example_configurations, running_example

d = running_example()
configs = example_configurations() + generate_configurations(d, 4, seed=1)

for measure in ("mi", "g3"):
    report = advise(configs, provider_inputs(d, configs, "with-1d"), measure)
    print(report.render())

# scoring against the true joints needs the raw data but separates the candidates
print(truth_report(d, configs, "mi").render())
