"""Reconstruction error by method on synthetic data, then advisory run time versus rows."""
from maskadvisor import SynthSpec, generate_configurations, generate_synthetic, run_benchmark, summarize_records
from maskadvisor.evaluation import time_advisory

d = generate_synthetic(SynthSpec(rows=10_000, attributes=10, gamma=0.7, seed=11))
configs = generate_configurations(d, 50, seed=12)
for method, stats in summarize_records(run_benchmark(d, configs)).items():
    print(f"{method:<12} median TVD {stats['median_tvd']:.3f}  IQR [{stats['p25']:.3f}, {stats['p75']:.3f}]")

print("\nrows       masking  reconstruction  utility   total")
for rows in (50_000, 100_000, 200_000, 400_000):
    data = generate_synthetic(SynthSpec(rows=rows, attributes=20, seed=3))
    _, t = time_advisory(data, generate_configurations(data, 10, seed=5))
    print(f"{rows:<9} {t['masking']:8.3f} {t['reconstruction']:15.3f} {t['utility']:8.3f} {t['total']:7.3f}")
