"""
Command Routing Module
"""
from typing import Callable, Dict, List

from cli.outputs import (
    RunOutputs,
    write_diagnostic_csvs,
    write_histogram_csv,
    write_hitting_csv,
    write_trajectory_csv,
)
from models.run_config import RunConfig
from .brackets import build_hierarchy, lorenz_fields, spanning_test
from .certificates import check_growth_bound, check_wonham_hypotheses, search_recurrence_params
from .exceptions import ConfigurationError, NoStationaryEstimateError, ParameterError
from .generator import box_points, generator_check, random_param_sets
from .lyapunov import (
    PsiProfile,
    ShiftedEnergyField,
    field_by_name,
    nonexplosion_constants,
    solve_transience_constants,
)
from .recurrence import (
    COORDS,
    cross_check_return_time,
    estimate_hitting,
    estimate_stationary,
    is_nondecreasing,
    nonstationarity_drift_diagnostic,
    survival_ladder,
)
from .regions import region_box
from .sde_core import simulate

BRANCH_MISMATCH_TOLERANCE = 1e-8
GROWTH_BOX_HALF_WIDTH = 100.0
GROWTH_SAMPLES = 2000


class CommandRouter:
    """
    Dispatches a subcommand to its handler. Each handler writes its files
    through `outputs` and returns whether every check it ran passed.
    """

    def __init__(self, config: RunConfig, outputs: RunOutputs, threads: int = 0):
        self.config = config
        self.outputs = outputs
        self.threads = threads

        self._command_map: Dict[str, Callable[[], bool]] = {
            "simulate": self.simulate,
            "generator-check": self.generator_check,
            "certificate recurrence": self.certificate_recurrence,
            "certificate transience": self.certificate_transience,
            "brackets": self.brackets,
            "hitting-time": self.hitting_time,
            "stationary": self.stationary,
            "diagnose-degenerate": self.diagnose_degenerate,
        }

    @property
    def commands(self) -> List[str]:
        return list(self._command_map)

    def route(self, command: str) -> bool:
        if command not in self._command_map:
            raise ValueError(f"Command '{command}' is not supported.")
        return self._command_map[command]()

    def simulate(self) -> bool:
        cfg = self.config.integration
        traj = simulate(self.config.model, cfg.start, cfg.dt, cfg.n_steps, cfg.seed)
        write_trajectory_csv(self.outputs, "trajectory.csv", traj)
        summary = {
            "n_states": int(traj.states.shape[0]),
            "escaped": traj.escaped,
            "escape_time": traj.escape_time,
            "final": traj.states[-1].tolist(),
        }
        self.outputs.report("simulate.json", "simulate", summary)
        return True

    def generator_check(self) -> bool:
        cfg = self.config.generator_check
        names = self.config.fields.names
        param_sets = [self.config.model] + random_param_sets(cfg.n_param_sets - 1, cfg.seed)

        def fields_for(params):
            fields = {}
            for name in names:
                try:
                    fields[name] = field_by_name(name, params)
                except ParameterError:
                    # e.g. psi2 with gamma1 = 0, V1 with beta >= 0
                    continue
                except ValueError as e:
                    raise ConfigurationError(f"fields.names: {e}") from e
            return fields

        report = generator_check(param_sets, box_points(cfg.n_points, cfg.seed), fields_for, h=cfg.h)
        self.outputs.report("generator_check.json", "generator-check", report, report.passed)
        return report.passed

    def certificate_recurrence(self) -> bool:
        cfg = self.config.certificate
        params = self.config.model
        initial = self.config.regions.model_dump(exclude_none=True)
        result = search_recurrence_params(
            params, budget=cfg.budget, search_samples=cfg.search_samples, verify_samples=cfg.verify_samples,
            k_max=cfg.k_max, slack=cfg.slack, seed=cfg.seed, threads=self.threads, initial=initial,
        )
        checks = []
        if result.found and cfg.n_starts > 0:
            checks = cross_check_return_time(
                params, result, dt=self.config.integration.dt, T=cfg.cross_check_T,
                n_traj=cfg.cross_check_n_traj, seed=cfg.seed, n_starts=cfg.n_starts, threads=self.threads,
            )
        passed = result.found and all(c.passed for c in checks)
        self.outputs.report(
            "certificate_recurrence.json", "certificate recurrence",
            {"search": result, "return_time": checks}, passed,
        )
        return passed

    def certificate_transience(self) -> bool:
        cfg = self.config.certificate
        params = self.config.model
        tp = solve_transience_constants(params)
        mismatch = PsiProfile(tp.B, tp.c0, tp.c1, tp.c2).branch_mismatch()
        report = check_wonham_hypotheses(params, tp, k_max=cfg.k_max, slack=cfg.slack, seed=cfg.seed, threads=self.threads)
        smooth = max(mismatch) < BRANCH_MISMATCH_TOLERANCE
        passed = report.passed and smooth
        self.outputs.report(
            "certificate_transience.json", "certificate transience",
            {"wonham": report, "branch_mismatch": list(mismatch), "branch_smooth": smooth}, passed,
        )
        return passed

    def brackets(self) -> bool:
        F, noise = lorenz_fields(self.config.model)
        hierarchy = build_hierarchy(F, noise, self.config.brackets.max_level)
        span = spanning_test(hierarchy)
        self.outputs.report(
            "brackets.json", "brackets", {"hierarchy": hierarchy.to_dict(), "span": span.to_dict()}, span.spans,
        )
        return span.spans

    def hitting_time(self) -> bool:
        cfg = self.config.integration
        params = self.config.model
        stats = estimate_hitting(params, cfg.start, cfg.radius, cfg.dt, cfg.T, cfg.n_traj, cfg.seed, self.threads)
        write_hitting_csv(self.outputs, "hitting_times.csv", stats)
        result = {"stats": stats.model_dump(exclude={"first_entry", "hit_times"})}
        passed = True
        if cfg.z0_ladder:
            ladder = survival_ladder(params, cfg.z0_ladder, cfg.radius, cfg.dt, cfg.T, cfg.n_traj, cfg.seed, self.threads)
            fractions = [s.survival_fraction for s in ladder]
            passed = is_nondecreasing(fractions)
            result["ladder"] = {
                "z0": list(cfg.z0_ladder),
                "survival_fraction": fractions,
                "censored_mean": [s.censored_mean for s in ladder],
                "nondecreasing": passed,
            }
        self.outputs.report("hitting_time.json", "hitting-time", result, passed)
        return passed

    def stationary(self) -> bool:
        cfg = self.config.integration
        try:
            law = estimate_stationary(
                self.config.model, cfg.start, cfg.dt, cfg.T_burn, cfg.T_sample, cfg.seed, cfg.thin, cfg.bins,
            )
        except NoStationaryEstimateError as e:
            self.outputs.report("stationary.json", "stationary", {"error": e.message}, False)
            return False
        for name in COORDS:
            write_histogram_csv(self.outputs, f"histogram_{name}.csv", law.histograms[name])
        self.outputs.report("stationary.json", "stationary", law, True)
        return True

    def diagnose_degenerate(self) -> bool:
        cfg = self.config.integration
        series = nonstationarity_drift_diagnostic(
            self.config.model, cfg.start, cfg.dt, cfg.T, cfg.n_traj, cfg.seed, cfg.record_every, self.threads,
        )
        write_diagnostic_csvs(self.outputs, series)
        # the second moment can only grow as fast as L(H + κ) ≤ c(H + κ) + d allows
        c, d, _ = nonexplosion_constants(self.config.model)
        box = region_box(GROWTH_BOX_HALF_WIDTH).with_samples(GROWTH_SAMPLES).with_seed(cfg.seed)
        growth = check_growth_bound(self.config.model, ShiftedEnergyField(self.config.model), box, c, d, self.threads)
        passed = series.nondecreasing and growth.passed
        summary = {
            "z2_slope": series.z2_slope,
            "nondecreasing": series.nondecreasing,
            "n_traj": series.n_traj,
            "growth_bound": growth,
        }
        self.outputs.report("diagnostic.json", "diagnose-degenerate", summary, passed)
        return passed
