use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use dirinfo_mac::channels::{spec_file, Builder, FsMac, NoiseChain};
use dirinfo_mac::dirinfo::{
    directed_info_given_state, directed_info_total, entropy_rate_bounds, DiKind, Source,
};
use dirinfo_mac::exponents::{exponent_curve, ErrorType, RhoGrid, StateLaws};
use dirinfo_mac::grid::{PolicyForm, PolicyGrid};
use dirinfo_mac::prob::pmf::fmt_sig;
use dirinfo_mac::prob::{channel_causal_law, joint_law, InitialState, PolicyPair, User};
use dirinfo_mac::regions::{
    limit_region_estimate, max_sum_rate, region_union, supadditivity_check, LimitEstimate,
    RateRegion, RegionRequest, S0Mode, SupadditivityReport, Variant,
};
use dirinfo_mac::simulate::{run_ensemble, SimConfig};
use dirinfo_mac::verify::{run_suite, Suite};

use crate::args::{
    Cli, Command, DirinfoArgs, EntropyArgs, ErrorTypeArg, ExponentArgs, FeedbackMode, Form,
    RegionArgs, ReplayArgs, SimulateArgs, SuiteArg, VerifyArgs,
};
use crate::manifest::{hash_file, read_manifest, Recorder};
use crate::Failure;

pub fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Replay(a) => replay(a),
        cmd => execute(cmd),
    }
}

fn name_and_seed(cmd: &Command) -> (&'static str, Option<u64>) {
    match cmd {
        Command::Region(_) => ("region", None),
        Command::Verify(a) => ("verify", Some(a.seed)),
        Command::Simulate(a) => ("simulate", Some(a.seed)),
        Command::Dirinfo(_) => ("dirinfo", None),
        Command::Exponent(_) => ("exponent", None),
        Command::Entropy(_) => ("entropy", None),
        Command::Replay(_) => ("replay", None),
    }
}

fn execute(cmd: &Command) -> Result<(), Failure> {
    let (name, seed) = name_and_seed(cmd);
    let mut rec = Recorder::new(
        name,
        serde_json::to_value(cmd)?,
        seed,
        cmd.out().map(PathBuf::as_path),
    );
    let outcome = dispatch(cmd, &mut rec);
    // a failed verification still leaves its report and manifest behind
    if outcome.is_ok() || matches!(outcome, Err(Failure::Verification(_))) {
        rec.finish()?;
    }
    outcome
}

fn dispatch(cmd: &Command, rec: &mut Recorder) -> Result<(), Failure> {
    match cmd {
        Command::Region(a) => region(a, rec),
        Command::Verify(a) => verify(a, rec),
        Command::Simulate(a) => simulate(a, rec),
        Command::Dirinfo(a) => dirinfo(a, rec),
        Command::Exponent(a) => exponent(a, rec),
        Command::Entropy(a) => entropy(a, rec),
        Command::Replay(_) => Err(Failure::Input("a manifest cannot record a replay".into())),
    }
}

/// Reruns a recorded command into a scratch directory and compares every
/// output with the recorded hash. The inputs must still hash as recorded.
fn replay(a: &ReplayArgs) -> Result<(), Failure> {
    let m = read_manifest(&a.manifest).map_err(Failure::Input)?;
    let mut cmd: Command = serde_json::from_value(m.parameters).map_err(|e| {
        Failure::Input(format!(
            "manifest parameters do not describe a command: {e}"
        ))
    })?;
    for input in &m.inputs {
        let now = hash_file(&input.path).map_err(|e| {
            Failure::Input(format!("cannot read input {}: {e}", input.path.display()))
        })?;
        if now.sha256 != input.sha256 {
            return Err(Failure::Input(format!(
                "input {} changed since the recorded run",
                input.path.display()
            )));
        }
    }
    let scratch = tempfile::tempdir()?;
    let Some(slot) = cmd.out_mut() else {
        return Err(Failure::Input("a manifest cannot record a replay".into()));
    };
    let Some(out_name) = slot
        .as_ref()
        .and_then(|p| p.file_name())
        .map(|n| n.to_owned())
    else {
        return Err(Failure::Input(
            "the recorded run wrote nothing to compare".into(),
        ));
    };
    *slot = Some(scratch.path().join(out_name));
    let mut rec = Recorder::new("replay", Value::Null, None, None);
    if let Err(f) = dispatch(&cmd, &mut rec) {
        if !matches!(f, Failure::Verification(_)) {
            return Err(f);
        }
    }
    let mut mismatched = Vec::new();
    for out in &m.outputs {
        let fresh = out
            .path
            .file_name()
            .map(|n| scratch.path().join(n))
            .ok_or_else(|| {
                Failure::Input(format!(
                    "recorded output {} has no file name",
                    out.path.display()
                ))
            })?;
        let same = hash_file(&fresh)
            .map(|h| h.sha256 == out.sha256)
            .unwrap_or(false);
        println!(
            "{} {}",
            if same { "same" } else { "DIFFERENT" },
            out.path.display()
        );
        if !same {
            mismatched.push(out.path.display().to_string());
        }
    }
    if mismatched.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "outputs differ: {}",
            mismatched.join(", ")
        )))
    }
}

fn load(spec: &Path, rec: &mut Recorder) -> Result<FsMac, Failure> {
    rec.input(spec)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", spec.display())))?;
    Ok(spec_file::load(spec)?)
}

fn initial_state(s0: S0Mode) -> Result<InitialState, Failure> {
    match s0 {
        S0Mode::Given(s) => Ok(InitialState::Given(s)),
        S0Mode::Stationary => Ok(InitialState::Stationary),
        S0Mode::Worst => Err(Failure::Input(
            "this command needs a definite initial state (given:ID or stationary)".into(),
        )),
    }
}

fn uniform_policy(ch: &FsMac, n: usize, fb: FeedbackMode) -> Result<PolicyPair, Failure> {
    let f = fb.build(ch.y())?;
    Ok(PolicyPair::uniform(n, ch.x1(), ch.x2(), f.clone(), f)?)
}

/// `out_n3.csv` from `out.csv`.
fn with_length(path: &Path, n: usize, tag: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = path
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    path.with_file_name(format!("{stem}_{tag}{n}{ext}"))
}

#[derive(Serialize)]
struct ConvergenceReport {
    n: Vec<usize>,
    /// Hausdorff distances between consecutive regions and to the hull of
    /// their union.
    steps: Vec<f64>,
    to_limit: Vec<f64>,
    /// For inner regions, over all pairs whose sum is also present.
    supadditivity: Option<SupadditivityReport>,
}

fn region(a: &RegionArgs, rec: &mut Recorder) -> Result<(), Failure> {
    let ch = load(&a.spec, rec)?;
    let fb = a.feedback.build(ch.y())?;
    let form = match a.form.unwrap_or(if a.feedback == FeedbackMode::None {
        Form::Iid
    } else {
        Form::Feedback
    }) {
        Form::Iid => PolicyForm::Iid,
        Form::Feedback => PolicyForm::Feedback,
        Form::OpenLoop => PolicyForm::OpenLoop,
    };
    let grid = PolicyGrid::new(a.grid, form)?;
    let lengths = &a.n.0;
    if lengths.len() > 1 && a.out.is_none() {
        return Err(Failure::Input("several block lengths need --out".into()));
    }
    let mut regions: Vec<RateRegion> = Vec::new();
    for &n in lengths {
        let req = RegionRequest::new(&ch, n, grid.clone(), a.variant)
            .feedback(fb.clone(), fb.clone())
            .s0(a.s0);
        let r = region_union(&ch, &req)?;
        match &a.out {
            None => rec.emit(None, &r.to_csv())?,
            Some(p) => {
                let path = if lengths.len() == 1 {
                    p.clone()
                } else {
                    with_length(p, n, "n")
                };
                r.write(&path)?;
                rec.output(path.clone());
                rec.output(path.with_extension("json"));
            }
        }
        regions.push(r);
    }
    if let (Some(out), true) = (&a.out, regions.len() > 1) {
        let LimitEstimate {
            steps, to_limit, ..
        } = limit_region_estimate(&regions)?;
        let supadditivity = if a.variant == Variant::Inner {
            let pairs: Vec<(usize, usize)> = lengths
                .iter()
                .flat_map(|&n| lengths.iter().map(move |&l| (n, l)))
                .filter(|&(n, l)| n <= l && lengths.contains(&(n + l)))
                .collect();
            Some(supadditivity_check(&regions, &pairs, 1e-9)?)
        } else {
            None
        };
        let report = ConvergenceReport {
            n: lengths.clone(),
            steps,
            to_limit,
            supadditivity,
        };
        let stem = out
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let path = out.with_file_name(format!("{stem}_convergence.json"));
        rec.emit(
            Some(&path),
            &(serde_json::to_string_pretty(&report)? + "\n"),
        )?;
    }
    Ok(())
}

fn verify(a: &VerifyArgs, rec: &mut Recorder) -> Result<(), Failure> {
    let suites: Vec<Suite> = match a.suite {
        SuiteArg::Lemmas => vec![Suite::Lemmas],
        SuiteArg::Exponents => vec![Suite::Exponents],
        SuiteArg::Geometry => vec![Suite::Geometry],
        SuiteArg::Zero => vec![Suite::Zero],
        SuiteArg::All => Suite::ALL.to_vec(),
    };
    let mut reports = Vec::new();
    for s in suites {
        reports.push(run_suite(s, a.seed, a.count.unwrap_or(s.default_count()))?);
    }
    let json = if reports.len() == 1 {
        serde_json::to_string_pretty(&reports[0])?
    } else {
        serde_json::to_string_pretty(&reports)?
    };
    rec.emit(a.out.as_deref(), &(json + "\n"))?;
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.checks
                .iter()
                .filter(|c| !c.passed())
                .map(move |c| format!("{}/{}", r.suite, c.name))
        })
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(failed.join(", ")))
    }
}

fn simulate(a: &SimulateArgs, rec: &mut Recorder) -> Result<(), Failure> {
    let ch = load(&a.spec, rec)?;
    let cfg = SimConfig {
        policy: uniform_policy(&ch, a.n, a.feedback)?,
        channel: ch,
        k: a.k,
        m1: a.m1,
        m2: a.m2,
        trials: a.trials,
        seed: a.seed,
        s0: initial_state(a.s0)?,
        bound_grid: a.bounds.then(RhoGrid::default),
    };
    let r = run_ensemble(&cfg)?;
    rec.emit(a.out.as_deref(), &(r.to_json()? + "\n"))?;
    Ok(())
}

fn dirinfo(a: &DirinfoArgs, rec: &mut Recorder) -> Result<(), Failure> {
    let ch = load(&a.spec, rec)?;
    let pol = uniform_policy(&ch, a.n, a.feedback)?;
    let n = a.n as f64;
    let kinds = [
        ("x1_to_y_given_x2", DiKind::Conditioned(User::One)),
        ("x2_to_y_given_x1", DiKind::Conditioned(User::Two)),
        ("x1x2_to_y", DiKind::Directed(Source::Both)),
    ];
    let mut csv = String::from("quantity,s0,total_bits,per_use_bits\n");
    let mut row = |q: &str, s0: &str, total: f64| {
        csv.push_str(&format!(
            "{q},{s0},{},{}\n",
            fmt_sig(total),
            fmt_sig(total / n)
        ));
    };
    match a.s0 {
        S0Mode::Worst => {
            for (q, kind) in kinds {
                let rep = directed_info_given_state(&pol, &ch, kind, None)?;
                row(q, &format!("worst:{}", rep.argmin), rep.min);
            }
        }
        s0 => {
            let init = initial_state(s0)?;
            let joint = joint_law(&pol, &channel_causal_law(&ch, &init, a.n)?)?;
            for (q, kind) in kinds {
                row(q, &init.label(), directed_info_total(&joint, kind));
            }
        }
    }
    if let Some(r) = a.grid {
        let init = initial_state(a.s0)
            .map_err(|_| Failure::Input("--grid needs --s0 given:ID or stationary".into()))?;
        let form = if a.feedback == FeedbackMode::None {
            PolicyForm::OpenLoop
        } else {
            PolicyForm::Feedback
        };
        let f = a.feedback.build(ch.y())?;
        let m = max_sum_rate(&ch, a.n, &PolicyGrid::new(r, form)?, &f, &f, &init)?;
        row("x1x2_to_y_grid_max", &init.label(), m.rate * n);
    }
    rec.emit(a.out.as_deref(), &csv)?;
    Ok(())
}

fn exponent(a: &ExponentArgs, rec: &mut Recorder) -> Result<(), Failure> {
    let ch = load(&a.spec, rec)?;
    let pol = uniform_policy(&ch, a.n, a.feedback)?;
    let laws = StateLaws::new(&ch, a.n)?;
    let grid = RhoGrid::uniform(a.rho_steps.max(1));
    let types = match a.error_type {
        ErrorTypeArg::One => vec![ErrorType::One],
        ErrorTypeArg::Two => vec![ErrorType::Two],
        ErrorTypeArg::Three => vec![ErrorType::Three],
        ErrorTypeArg::All => ErrorType::ALL.to_vec(),
    };
    let mut csv = String::from("error_type");
    let mut header_done = false;
    for i in types {
        let eval = exponent_curve(i, &pol, &laws, &grid)?;
        let body = eval.to_csv();
        let mut lines = body.lines();
        let header = lines.next().unwrap_or_default();
        if !header_done {
            csv.push(',');
            csv.push_str(header);
            csv.push('\n');
            header_done = true;
        }
        for l in lines {
            csv.push_str(&format!("{i},{l}\n"));
        }
    }
    rec.emit(a.out.as_deref(), &csv)?;
    Ok(())
}

fn entropy(a: &EntropyArgs, rec: &mut Recorder) -> Result<(), Failure> {
    let ch = load(&a.spec, rec)?;
    let noise = match ch.builder() {
        Some(Builder::GilbertElliott {
            alpha,
            beta,
            p_good,
            p_bad,
        }) => NoiseChain::gilbert_elliott(*alpha, *beta, *p_good, *p_bad)?,
        Some(Builder::AdditiveModq { noise, .. }) => noise.clone(),
        _ => {
            return Err(Failure::Input(
                "entropy needs a spec built as gilbert_elliott or additive_modq".into(),
            ))
        }
    };
    let mut csv = String::from("n,lower,upper,width\n");
    for k in 1..=a.n {
        let b = entropy_rate_bounds(&noise, k)?;
        csv.push_str(&format!(
            "{k},{},{},{}\n",
            fmt_sig(b.lower),
            fmt_sig(b.upper),
            fmt_sig(b.width())
        ));
    }
    rec.emit(a.out.as_deref(), &csv)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_length_file_names() {
        assert_eq!(
            with_length(Path::new("out/ge.csv"), 3, "n"),
            PathBuf::from("out/ge_n3.csv")
        );
        assert_eq!(with_length(Path::new("ge"), 1, "n"), PathBuf::from("ge_n1"));
    }
}
