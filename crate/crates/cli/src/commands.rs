use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use lattice_qd::asymmetric::{asymmetric_step, AsymmetricRun};
use lattice_qd::grover::{grover_run, optimal_iterations, sample_measurement, GroverMode, GroverState};
use lattice_qd::io::{fmt_f64, read_fixed_state, write_fixed_state, write_snapshots_csv, write_trace_csv};
use lattice_qd::reversible::{symmetric_evolve, DEFAULT_COEF_EXP};
use lattice_qd::spectral::{classify_stability, parseval_defect, spectral_evolve};
use lattice_qd::{
    evolve as evolve_forward, evolve_backward, init_state, quantize, reconstruct_complex, ComplexField, Direction,
    EvolutionTrace, FixedKernel, FloatKernel, InitialState, Kernel, LatticeConfig, PotentialProfile, StaggeredState,
    TraceOptions,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    config_err, to_object, CliError, CliResult, Dir, EvolveArgs, GroverArgs, InitArgs, InitKind, LatticeArgs, Mode,
    Repr, ReverseCheckArgs, SampleArgs, Scheme, SpectralCheckArgs, StabilityArgs,
};

const DEFAULT_SCALE_EXP: u32 = 30;
const DEFAULT_SHOTS: u64 = 10_000;
const DEFAULT_SPECTRAL_STEPS: u64 = 100;
const DEFAULT_STABILITY_SITES: usize = 64;
/// Relative tolerance when both ε and (a, τ) are given.
const EPS_CONSISTENCY: f64 = 1e-12;

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> CliResult<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

fn emit_report<C: Serialize>(command: &str, config: &C, results: Value, path: Option<&Path>) -> CliResult<()> {
    let report = json!({
        "command": command,
        "config": to_object(config),
        "results": results,
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Builds the lattice and writes the resolved `spacing`, `tau` and `eps` back.
fn resolve_lattice(args: &mut LatticeArgs) -> CliResult<LatticeConfig> {
    let Some(sites) = args.sites else {
        return config_err("--sites is required");
    };
    let spacing = *args.spacing.get_or_insert(1.0);
    let tau = match (args.tau, args.eps) {
        (None, None) => return config_err("one of --eps or --tau is required"),
        (Some(tau), None) => tau,
        (None, Some(eps)) => eps * spacing * spacing,
        (Some(tau), Some(eps)) => {
            let implied = tau / (spacing * spacing);
            if (implied - eps).abs() > EPS_CONSISTENCY * eps.abs().max(implied.abs()) {
                return config_err(format!(
                    "eps = {eps} is inconsistent with tau/a^2 = {implied} (tau = {tau}, a = {spacing})"
                ));
            }
            tau
        }
    };
    let config = LatticeConfig::new(sites, spacing, tau)?;
    args.tau = Some(config.time_step());
    args.eps.get_or_insert(config.epsilon());
    Ok(config)
}

fn parse_num<T: std::str::FromStr>(text: &str, what: &str, spec: &str) -> CliResult<T> {
    text.parse()
        .map_err(|_| CliError::Config(format!("bad {what} `{text}` in potential `{spec}`")))
}

fn resolve_potential(args: &mut LatticeArgs, config: &LatticeConfig) -> CliResult<PotentialProfile> {
    let spec = args.potential.get_or_insert_with(|| "zero".into()).clone();
    let parts: Vec<&str> = spec.split(':').collect();
    let sites = config.sites();
    match parts.as_slice() {
        ["zero"] => Ok(PotentialProfile::zeros(sites)),
        ["random", seed, amp] => Ok(PotentialProfile::random(
            sites,
            parse_num(amp, "amplitude", &spec)?,
            parse_num(seed, "seed", &spec)?,
        )),
        ["harmonic", center, k] => Ok(PotentialProfile::harmonic(
            config,
            parse_num(center, "center", &spec)?,
            parse_num(k, "strength", &spec)?,
        )),
        _ => config_err(format!(
            "unknown potential `{spec}` (expected zero, random:SEED:AMPLITUDE or harmonic:CENTER:STRENGTH)"
        )),
    }
}

fn resolve_init(args: &mut InitArgs, config: &LatticeConfig) -> CliResult<ComplexField> {
    let length = config.sites() as f64 * config.spacing();
    let kind = match *args.init.get_or_insert(InitKind::Gaussian) {
        InitKind::Uniform => InitialState::Uniform,
        InitKind::Point => InitialState::Point {
            site: *args.init_site.get_or_insert(0),
        },
        InitKind::Gaussian => InitialState::Gaussian {
            center: *args.center.get_or_insert(length / 2.0),
            width: *args.width.get_or_insert(length / 16.0),
            wavenumber: *args.k0.get_or_insert(0.0),
        },
    };
    Ok(init_state(&kind, config)?)
}

fn trace_options(record_every: &mut Option<usize>, snapshot_every: Option<usize>) -> TraceOptions {
    TraceOptions {
        record_every: *record_every.get_or_insert(1),
        snapshot_every,
    }
}

fn run_staggered<K: Kernel>(
    state: &StaggeredState<K::Field>,
    kernel: &K,
    steps: u64,
    direction: Dir,
    options: &TraceOptions,
) -> CliResult<(StaggeredState<K::Field>, EvolutionTrace)> {
    Ok(match direction {
        Dir::Forward => evolve_forward(state, kernel, steps, options)?,
        Dir::Backward => evolve_backward(state, kernel, steps, options)?,
    })
}

fn write_traces(trace: &EvolutionTrace, args: &EvolveArgs) -> CliResult<()> {
    if let Some(path) = &args.out {
        let mut w = create(path)?;
        write_trace_csv(trace, &mut w)?;
        finish(w, path)?;
    }
    if let Some(path) = &args.snapshots {
        let mut w = create(path)?;
        write_snapshots_csv(trace, &mut w)?;
        finish(w, path)?;
    }
    Ok(())
}

fn trace_summary(trace: &EvolutionTrace) -> Value {
    let records = trace.records();
    let (first, last) = (&records[0], &records[records.len() - 1]);
    json!({
        "records": records.len(),
        "l_range": [first.l, last.l],
        "initial_probability": first.probability,
        "final_probability": last.probability,
        "initial_invariant": first.invariant,
        "final_invariant": last.invariant,
        "invariant_relative_drift": trace.invariant_relative_drift(),
        "probability_max_deviation": trace.probability_max_deviation(),
    })
}

pub fn evolve(mut args: EvolveArgs) -> CliResult<()> {
    let Some(steps) = args.steps else {
        return config_err("--steps is required");
    };
    if args.snapshots.is_some() && args.snapshot_every.is_none() {
        return config_err("--snapshots needs --snapshot-every");
    }
    let scheme = *args.scheme.get_or_insert(Scheme::Reversible);
    let repr = *args.repr.get_or_insert(Repr::Float);
    let direction = *args.direction.get_or_insert(Dir::Forward);
    let options = trace_options(&mut args.record_every, args.snapshot_every);
    if options.record_every == 0 || options.snapshot_every == Some(0) {
        return config_err("trace cadences must be at least 1");
    }

    let results = match scheme {
        Scheme::Asymmetric => {
            if repr == Repr::Fixed || direction == Dir::Backward || args.state_in.is_some() || args.state_out.is_some() {
                return config_err("the asymmetric scheme runs forward in floating point only");
            }
            if args.snapshots.is_some() {
                return config_err("snapshots are only recorded for the reversible scheme");
            }
            let config = resolve_lattice(&mut args.lattice)?;
            let potential = resolve_potential(&mut args.lattice, &config)?;
            let psi = resolve_init(&mut args.init, &config)?;
            evolve_asymmetric(&args, config, potential, psi, steps, options.record_every)?
        }
        Scheme::Reversible => match repr {
            Repr::Float => {
                if args.state_in.is_some() || args.state_out.is_some() {
                    return config_err("state files hold fixed-point states; use --repr fixed");
                }
                let config = resolve_lattice(&mut args.lattice)?;
                let potential = resolve_potential(&mut args.lattice, &config)?;
                let psi = resolve_init(&mut args.init, &config)?;
                let kernel = FloatKernel::new(&config, &potential)?;
                let start = StaggeredState::from_history(psi.real_part(), psi.imag_part(), &kernel)?;
                let (_, trace) = run_staggered(&start, &kernel, steps, direction, &options)?;
                write_traces(&trace, &args)?;
                trace_summary(&trace)
            }
            Repr::Fixed => {
                let config = resolve_lattice(&mut args.lattice)?;
                let potential = resolve_potential(&mut args.lattice, &config)?;
                let start = match &args.state_in {
                    Some(path) => {
                        let file = File::open(path).map_err(|e| CliError::io(path, e))?;
                        let (state, coef_exp) = read_fixed_state(BufReader::new(file))?;
                        if args.fixed.coef_exp.is_some_and(|p| p != coef_exp) {
                            return config_err(format!(
                                "--coef-exp {} disagrees with the state file ({coef_exp})",
                                args.fixed.coef_exp.unwrap()
                            ));
                        }
                        if state.sites() != config.sites() {
                            return Err(lattice_qd::Error::Length {
                                expected: config.sites(),
                                actual: state.sites(),
                            }
                            .into());
                        }
                        args.fixed.coef_exp = Some(coef_exp);
                        args.fixed.scale_exp = Some(state.r_even().scale_exp);
                        args.init = InitArgs::default();
                        state
                    }
                    None => {
                        let scale = *args.fixed.scale_exp.get_or_insert(DEFAULT_SCALE_EXP);
                        let coef = *args.fixed.coef_exp.get_or_insert(DEFAULT_COEF_EXP);
                        let psi = resolve_init(&mut args.init, &config)?;
                        let kernel = FixedKernel::new(&config, &potential, coef)?;
                        StaggeredState::from_history(
                            quantize(&psi.real_part(), scale)?,
                            quantize(&psi.imag_part(), scale)?,
                            &kernel,
                        )?
                    }
                };
                let coef_exp = args.fixed.coef_exp.expect("resolved above");
                let kernel = FixedKernel::new(&config, &potential, coef_exp)?;
                let (end, trace) = run_staggered(&start, &kernel, steps, direction, &options)?;
                write_traces(&trace, &args)?;
                if let Some(path) = &args.state_out {
                    let mut w = create(path)?;
                    write_fixed_state(&end, coef_exp, &mut w)?;
                    finish(w, path)?;
                }
                let mut summary = trace_summary(&trace);
                if let Some(q) = end.exact_quadratics() {
                    summary["final_exact"] = json!({
                        "probability_raw": q.probability.to_string(),
                        "invariant_raw": q.invariant.to_string(),
                        "raw_scale_exp": q.scale_exp,
                    });
                }
                summary
            }
        },
    };
    emit_report("evolve", &args, results, args.report.as_deref())
}

fn evolve_asymmetric(
    args: &EvolveArgs,
    config: LatticeConfig,
    potential: PotentialProfile,
    psi: ComplexField,
    steps: u64,
    record_every: usize,
) -> CliResult<Value> {
    let mut run = AsymmetricRun::new(config, potential, psi)?;
    let initial = run.state.norm_sqr();
    let mut rows = vec![(0u64, initial)];
    for k in 1..=steps {
        run = asymmetric_step(&run);
        if k % record_every as u64 == 0 {
            rows.push((k, run.state.norm_sqr()));
        }
    }
    if let Some(path) = &args.out {
        let mut w = create(path)?;
        let io = |e| CliError::io(path, e);
        writeln!(w, "l,P_l").map_err(io)?;
        for (k, p) in &rows {
            writeln!(w, "{k},{}", fmt_f64(*p)).map_err(io)?;
        }
        finish(w, path)?;
    }
    let last = run.state.norm_sqr();
    Ok(json!({
        "records": rows.len(),
        "initial_probability": initial,
        "final_probability": last,
        "relative_norm_growth": last / initial - 1.0,
    }))
}

fn count_mismatches<F: PartialEq>(a: &[F], b: &[F]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

pub fn reverse_check(mut args: ReverseCheckArgs) -> CliResult<()> {
    let Some(steps) = args.steps else {
        return config_err("--steps is required");
    };
    let repr = *args.repr.get_or_insert(Repr::Fixed);
    let config = resolve_lattice(&mut args.lattice)?;
    let potential = resolve_potential(&mut args.lattice, &config)?;
    let psi = resolve_init(&mut args.init, &config)?;
    let results = match repr {
        Repr::Fixed => {
            let scale = *args.fixed.scale_exp.get_or_insert(DEFAULT_SCALE_EXP);
            let coef = *args.fixed.coef_exp.get_or_insert(DEFAULT_COEF_EXP);
            let kernel = FixedKernel::new(&config, &potential, coef)?;
            let start = StaggeredState::from_history(
                quantize(&psi.real_part(), scale)?,
                quantize(&psi.imag_part(), scale)?,
                &kernel,
            )?;
            let back = there_and_back(&start, &kernel, steps)?;
            let mismatches = count_mismatches(&back.r_even().ints, &start.r_even().ints)
                + count_mismatches(&back.i_odd().ints, &start.i_odd().ints)
                + count_mismatches(&back.i_prev().ints, &start.i_prev().ints);
            json!({ "bit_exact": mismatches == 0 && back.step_count() == start.step_count(), "mismatches": mismatches })
        }
        Repr::Float => {
            args.fixed = Default::default();
            let kernel = FloatKernel::new(&config, &potential)?;
            let start = StaggeredState::from_history(psi.real_part(), psi.imag_part(), &kernel)?;
            let back = there_and_back(&start, &kernel, steps)?;
            let pairs = [
                (&back.r_even().0, &start.r_even().0),
                (&back.i_odd().0, &start.i_odd().0),
                (&back.i_prev().0, &start.i_prev().0),
            ];
            let mismatches: usize = pairs.iter().map(|(a, b)| count_mismatches(a, b)).sum();
            let max_err = pairs
                .iter()
                .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
                .fold(0.0, f64::max);
            json!({ "bit_exact": mismatches == 0, "mismatches": mismatches, "max_abs_error": max_err })
        }
    };
    emit_report("reverse-check", &args, results, args.report.as_deref())
}

fn there_and_back<K: Kernel>(
    start: &StaggeredState<K::Field>,
    kernel: &K,
    steps: u64,
) -> CliResult<StaggeredState<K::Field>> {
    let mut state = start.clone();
    for _ in 0..steps {
        state.advance(kernel, Direction::Forward)?;
    }
    for _ in 0..steps {
        state.advance(kernel, Direction::Backward)?;
    }
    Ok(state)
}

pub fn stability(mut args: StabilityArgs) -> CliResult<()> {
    let sites = *args.lattice.sites.get_or_insert(DEFAULT_STABILITY_SITES);
    let spacing = *args.lattice.spacing.get_or_insert(1.0);
    let eps = match (args.lattice.eps, args.lattice.tau) {
        (None, None) => return config_err("one of --eps or --tau is required"),
        (Some(eps), None) => eps,
        (None, Some(tau)) => tau / (spacing * spacing),
        (Some(eps), Some(tau)) => {
            let implied = tau / (spacing * spacing);
            if (implied - eps).abs() > EPS_CONSISTENCY * eps.abs().max(implied.abs()) {
                return config_err(format!("eps = {eps} is inconsistent with tau/a^2 = {implied}"));
            }
            eps
        }
    };
    args.lattice.eps = Some(eps);
    args.lattice.tau = Some(eps * spacing * spacing);
    // The verdict is defined for either sign of ε; the lattice only carries |ε|.
    let config = LatticeConfig::with_epsilon(sites, spacing, eps.abs())?;
    let report = classify_stability(eps, &config);
    emit_report("stability", &args, serde_json::to_value(report).expect("serializes"), args.report.as_deref())
}

pub fn spectral_check(mut args: SpectralCheckArgs) -> CliResult<()> {
    let steps = *args.steps.get_or_insert(DEFAULT_SPECTRAL_STEPS);
    let config = resolve_lattice(&mut args.lattice)?;
    let potential = resolve_potential(&mut args.lattice, &config)?;
    if !potential.is_zero() {
        return config_err("the spectral solution covers the free scheme only; use --potential zero");
    }
    let psi0 = resolve_init(&mut args.init, &config)?;
    // Second level from one forward-Euler step, the usual leapfrog start-up.
    let psi1 = asymmetric_step(&AsymmetricRun::new(config, potential.clone(), psi0.clone())?).state;
    let direct = symmetric_evolve(&psi0, &psi1, &potential, &config, steps)?;
    let spectral = spectral_evolve(&psi0, &psi1, &config, steps)?;
    let max_err = direct
        .values
        .iter()
        .zip(&spectral.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let stability = classify_stability(config.epsilon(), &config);
    let results = json!({
        "steps": steps,
        "max_abs_error": max_err,
        "direct_norm": direct.norm_sqr().sqrt(),
        "parseval_defect": parseval_defect(&psi0, &config)?,
        "stability": stability,
    });
    emit_report("spectral-check", &args, results, args.report.as_deref())
}

fn write_histogram(path: &Path, label: &str, hist: &[u64]) -> CliResult<()> {
    let mut w = create(path)?;
    let io = |e| CliError::io(path, e);
    writeln!(w, "{label},count").map_err(io)?;
    for (k, c) in hist.iter().enumerate() {
        writeln!(w, "{k},{c}").map_err(io)?;
    }
    finish(w, path)
}

pub fn grover(mut args: GroverArgs) -> CliResult<()> {
    let Some(items) = args.sites else {
        return config_err("--sites is required");
    };
    let marked = *args.marked.get_or_insert(0);
    let seed = *args.seed.get_or_insert(0);
    let shots = *args.shots.get_or_insert(DEFAULT_SHOTS);
    let mode = *args.mode.get_or_insert(Mode::Full);
    let (optimal, optimal_p) = optimal_iterations(items)?;
    let iterations = match args.iterations.get_or_insert_with(|| "auto".into()).as_str() {
        "auto" => optimal,
        n => n
            .parse()
            .map_err(|_| CliError::Config(format!("--iterations must be `auto` or a count, got `{n}`")))?,
    };
    let core_mode = match mode {
        Mode::Full => GroverMode::Full,
        Mode::Reduced => GroverMode::Reduced,
    };
    let trace = grover_run(items, marked, iterations, core_mode, seed, shots)?;
    if let Some(path) = &args.out {
        let mut w = create(path)?;
        let io = |e| CliError::io(path, e);
        writeln!(w, "iteration,marked_probability,norm").map_err(io)?;
        for (k, (p, n)) in trace.marked_probability.iter().zip(&trace.norms).enumerate() {
            writeln!(w, "{k},{},{}", fmt_f64(*p), fmt_f64(*n)).map_err(io)?;
        }
        finish(w, path)?;
    }
    if let Some(path) = &args.histogram {
        write_histogram(path, "item", &trace.histogram)?;
    }
    let results = json!({
        "items": items,
        "iterations": iterations,
        "optimal_iterations": optimal,
        "optimal_success_probability": optimal_p,
        "success_probability": trace.marked_probability.last(),
        "marked_count": trace.histogram[marked],
        "marked_fraction": trace.histogram[marked] as f64 / shots as f64,
    });
    emit_report("grover", &args, results, args.report.as_deref())
}

pub fn sample(mut args: SampleArgs) -> CliResult<()> {
    let seed = *args.seed.get_or_insert(0);
    let shots = *args.shots.get_or_insert(DEFAULT_SHOTS);
    let psi = match &args.state_in {
        Some(path) => {
            let file = File::open(path).map_err(|e| CliError::io(path, e))?;
            let (state, _) = read_fixed_state(BufReader::new(file))?;
            args.lattice = LatticeArgs::default();
            args.init = InitArgs::default();
            reconstruct_complex(&state)
        }
        None => {
            let config = resolve_lattice(&mut args.lattice)?;
            resolve_init(&mut args.init, &config)?
        }
    };
    let sites = psi.len();
    let hist = sample_measurement(&GroverState::new(psi.values, 0)?, seed, shots)?;
    if let Some(path) = &args.histogram {
        write_histogram(path, "site", &hist)?;
    }
    let (mode_site, mode_count) = hist
        .iter()
        .enumerate()
        .max_by_key(|(k, c)| (**c, std::cmp::Reverse(*k)))
        .map(|(k, c)| (k, *c))
        .expect("at least one site");
    let results = json!({
        "sites": sites,
        "most_frequent_site": mode_site,
        "most_frequent_count": mode_count,
    });
    emit_report("sample", &args, results, args.report.as_deref())
}
