"""
Performance Metrics Calculator
Welfare and exploration statistics over replications
"""

from dataclasses import asdict, dataclass, field
from typing import Dict, Optional

import numpy as np
import pandas as pd

from utils.console import echo


@dataclass
class Metrics:
    replications: int
    avg_reward: float
    avg_reward_se: float
    fraction_optimal: float
    fraction_optimal_se: float
    optimality_ratio: Optional[float]
    optimality_ratio_se: Optional[float]
    ratio_runs: int
    regret: Optional[float]
    regret_se: Optional[float]
    regret_runs: int
    b_better_rate: float
    exploration_end_mean: Optional[float]
    exploration_end_max: Optional[int]
    unfinished_runs: int
    rho_mean: float
    shadow_mean: float
    bound_failures: int
    bound_summary: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return asdict(self)


class PerformanceCalculator:
    """Per-replication rows and their aggregate"""

    @staticmethod
    def standard_error(values: pd.Series) -> float:
        """
        Standard error of the mean

        Args:
            values: Sample

        Returns:
            std / sqrt(n), 0 for fewer than two values
        """
        values = values.dropna()
        if len(values) < 2:
            return 0.0
        return float(values.std(ddof=1) / np.sqrt(len(values)))

    @staticmethod
    def replication_row(trace) -> Dict:
        """One CSV row per replication"""
        best = trace.best_reward
        return {
            'replication': trace.index,
            'seed': trace.seed,
            'va': trace.va,
            'vb': trace.vb,
            'avg_reward': trace.avg_reward,
            'fraction_optimal': trace.fraction_optimal,
            # the welfare ratio only makes sense for a positive optimum
            'optimality_ratio': trace.avg_reward / best if best > 0 else np.nan,
            'regret': trace.regret if best <= 0 else np.nan,
            'exploration_end': trace.exploration_end if trace.exploration_end is not None else np.nan,
            'rho': len(trace.rho),
            'shadow': len(trace.shadow),
            'k': trace.k_final,
            'z': trace.z_final,
            'b_revealed': trace.b_revealed,
        }

    @staticmethod
    def summarize_bounds(checks: pd.DataFrame) -> Dict:
        if checks.empty:
            return {}
        summary = {}
        for name, group in checks.groupby('check', sort=True):
            applicable = group[group['applicable']]
            summary[name] = {
                'applicable_runs': int(len(applicable)),
                'failed_runs': int((~applicable['passed']).sum()),
                'max_measured': float(applicable['measured'].max()) if len(applicable) else None,
                'bound': float(group['bound'].max()),
                'min_slack': float(applicable['slack'].min()) if len(applicable) else None,
            }
        return summary

    @staticmethod
    def summarize(rows: pd.DataFrame, checks: Optional[pd.DataFrame] = None) -> Metrics:
        """
        Aggregate replication rows into Metrics

        Args:
            rows: Output of replication_row for every replication
            checks: Bound-check rows (optional)

        Returns:
            Metrics with standard errors
        """
        se = PerformanceCalculator.standard_error
        checks = checks if checks is not None else pd.DataFrame()
        ends = rows['exploration_end'].dropna()
        ratios = rows['optimality_ratio'].dropna()
        regrets = rows['regret'].dropna()
        failures = int((~checks['passed']).sum()) if not checks.empty else 0
        return Metrics(
            replications=int(len(rows)),
            avg_reward=float(rows['avg_reward'].mean()),
            avg_reward_se=se(rows['avg_reward']),
            fraction_optimal=float(rows['fraction_optimal'].mean()),
            fraction_optimal_se=se(rows['fraction_optimal']),
            optimality_ratio=float(ratios.mean()) if len(ratios) else None,
            optimality_ratio_se=se(ratios) if len(ratios) else None,
            ratio_runs=int(len(ratios)),
            regret=float(regrets.mean()) if len(regrets) else None,
            regret_se=se(regrets) if len(regrets) else None,
            regret_runs=int(len(regrets)),
            b_better_rate=float((rows['vb'] > rows['va']).mean()),
            exploration_end_mean=float(ends.mean()) if len(ends) else None,
            exploration_end_max=int(ends.max()) if len(ends) else None,
            unfinished_runs=int(rows['exploration_end'].isna().sum()),
            rho_mean=float(rows['rho'].mean()),
            shadow_mean=float(rows['shadow'].mean()),
            bound_failures=failures,
            bound_summary=PerformanceCalculator.summarize_bounds(checks),
        )

    @staticmethod
    def print_report(metrics: Metrics, title: str = 'SIMULATION REPORT'):
        """Print formatted metrics report"""
        echo("\n" + "=" * 60)
        echo(title)
        echo("=" * 60)

        echo("\nWELFARE:")
        echo(f"  Replications: {metrics.replications}")
        echo(f"  Avg Reward: {metrics.avg_reward:.4f} (se {metrics.avg_reward_se:.4f})")
        echo(f"  Fraction Optimal: {metrics.fraction_optimal:.4f} (se {metrics.fraction_optimal_se:.4f})")
        if metrics.optimality_ratio is not None:
            echo(f"  Optimality Ratio: {metrics.optimality_ratio:.4f} over {metrics.ratio_runs} runs")
        if metrics.regret is not None:
            echo(f"  Regret: {metrics.regret:.4f} over {metrics.regret_runs} runs")
        echo(f"  P(V_b > V_a): {metrics.b_better_rate:.4f}")

        echo("\nEXPLORATION:")
        if metrics.exploration_end_mean is not None:
            echo(f"  Exploration End: mean {metrics.exploration_end_mean:.1f}, max {metrics.exploration_end_max}")
        echo(f"  Unfinished Runs: {metrics.unfinished_runs}")
        echo(f"  Testers: {metrics.rho_mean:.1f}  Shadow: {metrics.shadow_mean:.1f}")

        if metrics.bound_summary:
            echo("\nBOUND CHECKS:")
            for name, item in metrics.bound_summary.items():
                echo(f"  {name}: {item['failed_runs']} failed / {item['applicable_runs']} applicable")

        echo("=" * 60)
