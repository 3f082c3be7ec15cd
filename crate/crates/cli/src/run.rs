//! Trial orchestration.

use std::path::Path;
use std::time::Instant;

use raibfd::rng::mix_seed;
use raibfd::scene::linear_to_db;
use raibfd::sim::{ao_sim, sim_metric_kappa, AoOptions};
use raibfd::{
    design_raibfd, design_softnull, evaluate_deviated, evaluate_link, optimize_ideal, scenario_channels, CMat,
    PhaseResolution, RateReport, RcgOptions, RisState, Scenario,
};
use rayon::prelude::*;

use crate::output::{emit_csv, emit_svg};
use crate::record::{Method, ResultRecord};
use crate::spec::{channel_scenario, ExperimentKind, ExperimentSpec, SweepPoint};
use crate::HarnessError;

/// Seed of the channel draw for `trial`. Every sweep point of a trial
/// shares it, so sweep points are compared on common channels.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    mix_seed(base, trial as u64)
}

/// Runs every (sweep point, trial) pair and returns the records sorted by
/// sweep point, then trial. The result does not depend on `spec.workers`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRecord>, HarnessError> {
    let points = spec.points()?;
    let ao = spec.ao_options();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = spec.workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))?;
    let per_trial: Vec<Vec<ResultRecord>> = pool.install(|| {
        (0..spec.trials)
            .into_par_iter()
            .map(|trial| Trial::new(spec, &points, &ao, trial).run())
            .collect::<Result<_, _>>()
    })?;
    let mut records: Vec<ResultRecord> = per_trial.into_iter().flatten().collect();
    // Stable, so the method order inside a (point, trial) cell is kept.
    records.sort_by_key(|r| (r.point_index, r.trial));
    if let Some(bad) = records.iter().find(|r| !r.is_finite()) {
        return Err(HarnessError::NonFinite(format!(
            "sweep point {} trial {} method {}",
            bad.sweep_point,
            bad.trial,
            bad.method.as_str()
        )));
    }
    Ok(records)
}

/// Runs the experiment, writes the CSV to `spec.out_path` and, when asked,
/// an SVG next to it. Returns the records.
pub fn execute(spec: &ExperimentSpec, svg: bool) -> Result<Vec<ResultRecord>, HarnessError> {
    let records = run_experiment(spec)?;
    let out = Path::new(&spec.out_path);
    emit_csv(&records, out)?;
    if svg {
        emit_svg(&records, &out.with_extension("svg"))?;
    }
    Ok(records)
}

struct Trial<'a> {
    spec: &'a ExperimentSpec,
    points: &'a [SweepPoint],
    ao: &'a AoOptions,
    trial: usize,
    seed: u64,
}

/// Values that vary per record; the rest comes from the trial and point.
struct Outcome {
    method: Method,
    ul_rate: f64,
    dl_rate: f64,
    kappa: f64,
    iterations: usize,
    terminal_cost: f64,
    elapsed_ms: f64,
}

impl Outcome {
    fn from_report(
        method: Method,
        report: &RateReport,
        iterations: usize,
        terminal_cost: f64,
        elapsed_ms: f64,
    ) -> Self {
        Self {
            method,
            ul_rate: report.ul_rate_bps_hz,
            dl_rate: report.dl_rate(),
            kappa: report.kappa,
            iterations,
            terminal_cost,
            elapsed_ms,
        }
    }
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

impl<'a> Trial<'a> {
    fn new(spec: &'a ExperimentSpec, points: &'a [SweepPoint], ao: &'a AoOptions, trial: usize) -> Self {
        let seed = trial_seed(spec.scenario.seed, trial);
        Self {
            spec,
            points,
            ao,
            trial,
            seed,
        }
    }

    fn scenario_at(&self, point: &SweepPoint) -> Scenario {
        let mut s = point.apply(&self.spec.scenario);
        s.seed = self.seed;
        s
    }

    fn record(&self, point_index: usize, o: Outcome) -> ResultRecord {
        ResultRecord {
            kind: self.spec.kind,
            method: o.method,
            sweep_point: self.points[point_index].label(),
            trial: self.trial,
            seed: self.seed,
            ul_rate: o.ul_rate,
            dl_rate: o.dl_rate,
            sum_rate: o.ul_rate + o.dl_rate,
            kappa_db: linear_to_db(o.kappa),
            iterations: o.iterations,
            terminal_cost: o.terminal_cost,
            wall_ms: if self.spec.record_timing { o.elapsed_ms } else { 0.0 },
            point_index,
        }
    }

    fn run(&self) -> Result<Vec<ResultRecord>, HarnessError> {
        match self.spec.kind {
            ExperimentKind::Convergence | ExperimentKind::KappaVsMd | ExperimentKind::KappaVsBits => {
                self.run_design_only()
            }
            ExperimentKind::RatesVsMd => self.run_rates_vs_md(),
            ExperimentKind::RatesVsEnob => self.run_rates_vs_enob(),
            ExperimentKind::PhaseDeviation => self.run_phase_deviation(),
        }
    }

    fn initial_phases(&self, m_ris: usize) -> raibfd::CVec {
        RisState::random(m_ris, PhaseResolution::Continuous, self.seed).d
    }

    fn run_design_only(&self) -> Result<Vec<ResultRecord>, HarnessError> {
        let with_baseline = self.spec.kind != ExperimentKind::Convergence;
        let mut out = Vec::new();
        for (i, point) in self.points.iter().enumerate() {
            let s = self.scenario_at(point);
            let channels = scenario_channels(&channel_scenario(&s))?;
            let d0 = self.initial_phases(s.m_ris());
            let start = Instant::now();
            let sim = ao_sim(&channels, s.m_d, s.ris_bits, &d0, self.ao)?;
            let kappa = sim_metric_kappa(&channels, &sim.ris.d, &sim.p_sim)?;
            out.push(self.record(
                i,
                Outcome {
                    method: Method::Raibfd,
                    ul_rate: 0.0,
                    dl_rate: 0.0,
                    kappa,
                    iterations: sim.trace.outer_iterations(),
                    terminal_cost: sim.trace.final_cost(),
                    elapsed_ms: ms_since(start),
                },
            ));
            if with_baseline {
                let start = Instant::now();
                let random = RisState::random(s.m_ris(), s.ris_bits, self.seed);
                let identity = CMat::identity(s.m_t, s.m_d);
                let kappa = sim_metric_kappa(&channels, &random.d, &identity)?;
                out.push(self.record(
                    i,
                    Outcome {
                        method: Method::RandomRis,
                        ul_rate: 0.0,
                        dl_rate: 0.0,
                        kappa,
                        iterations: 0,
                        terminal_cost: kappa * s.m_r as f64,
                        elapsed_ms: ms_since(start),
                    },
                ));
            }
        }
        Ok(out)
    }

    fn run_rates_vs_md(&self) -> Result<Vec<ResultRecord>, HarnessError> {
        let mut out = Vec::new();
        for (i, point) in self.points.iter().enumerate() {
            let s = self.scenario_at(point);
            let channels = scenario_channels(&s)?;
            let d0 = self.initial_phases(s.m_ris());
            let start = Instant::now();
            let design = design_raibfd(&channels, &s, &d0, self.ao)?;
            let report = evaluate_link(&channels, &design.sim.ris, None, &design.bundle, &s)?;
            out.push(self.record(
                i,
                Outcome::from_report(
                    Method::Raibfd,
                    &report,
                    design.sim.trace.outer_iterations(),
                    design.sim.trace.final_cost(),
                    ms_since(start),
                ),
            ));
        }
        Ok(out)
    }

    /// The designs do not depend on ENOB, so each runs once per trial and
    /// is evaluated at every sweep point.
    fn run_rates_vs_enob(&self) -> Result<Vec<ResultRecord>, HarnessError> {
        let mut base = self.spec.scenario.clone();
        base.seed = self.seed;
        let channels = scenario_channels(&base)?;
        let d0 = self.initial_phases(base.m_ris());

        let start = Instant::now();
        let raibfd = design_raibfd(&channels, &base, &d0, self.ao)?;
        let raibfd_ms = ms_since(start);
        let start = Instant::now();
        let softnull = design_softnull(&channels, &base)?;
        let softnull_ms = ms_since(start);
        let start = Instant::now();
        let ideal = optimize_ideal(&channels, &base, &d0, &RcgOptions::default())?;
        let ideal_ms = ms_since(start);
        let ideal_kappa = sim_metric_kappa(&channels, &ideal.ris.d, &CMat::identity(base.m_t, base.m_t))?;

        let mut out = Vec::new();
        for (i, point) in self.points.iter().enumerate() {
            let s = self.scenario_at(point);
            let start = Instant::now();
            let report = evaluate_link(&channels, &raibfd.sim.ris, None, &raibfd.bundle, &s)?;
            out.push(self.record(
                i,
                Outcome::from_report(
                    Method::Raibfd,
                    &report,
                    raibfd.sim.trace.outer_iterations(),
                    raibfd.sim.trace.final_cost(),
                    raibfd_ms + ms_since(start),
                ),
            ));
            let start = Instant::now();
            let report = evaluate_link(&softnull.channels, &softnull.ris, None, &softnull.bundle, &s)?;
            let cost = report.kappa * s.m_r as f64;
            out.push(self.record(
                i,
                Outcome::from_report(Method::Softnull, &report, 0, cost, softnull_ms + ms_since(start)),
            ));
            out.push(self.record(
                i,
                Outcome {
                    method: Method::Ideal,
                    ul_rate: ideal.ul_rate,
                    dl_rate: ideal.dl_rate,
                    kappa: ideal_kappa,
                    iterations: ideal.rcg.iterations,
                    terminal_cost: ideal.rcg.final_cost(),
                    elapsed_ms: ideal_ms,
                },
            ));
        }
        Ok(out)
    }

    /// One design per trial; each sweep point applies a deviation of that
    /// magnitude to the same per-element draw.
    fn run_phase_deviation(&self) -> Result<Vec<ResultRecord>, HarnessError> {
        let mut base = self.spec.scenario.clone();
        base.seed = self.seed;
        let channels = scenario_channels(&base)?;
        let d0 = self.initial_phases(base.m_ris());
        let start = Instant::now();
        let design = design_raibfd(&channels, &base, &d0, self.ao)?;
        let design_ms = ms_since(start);

        let mut out = Vec::new();
        for (i, point) in self.points.iter().enumerate() {
            let SweepPoint::DeviationDeg(deg) = *point else {
                unreachable!("phase_deviation sweeps are validated as degrees")
            };
            let start = Instant::now();
            let realized = design.sim.ris.with_phase_deviation(deg.to_radians(), self.seed, 0);
            let report = evaluate_deviated(&channels, &base, &design, &realized, self.spec.deviation_policy)?;
            out.push(self.record(
                i,
                Outcome::from_report(
                    Method::Raibfd,
                    &report,
                    design.sim.trace.outer_iterations(),
                    design.sim.trace.final_cost(),
                    design_ms + ms_since(start),
                ),
            ));
        }
        Ok(out)
    }
}
