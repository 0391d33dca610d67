//! Output formatting. Every float goes through `fmt_f64`/`json_f64`, so the
//! same inputs always print the same bytes.

use rayon::prelude::*;
use serde_json::{json, Value};

use chromopt::fmt::{fmt_f64, json_f64};
use chromopt::graphs::{ln_big, turan_parts, CountResult};
use chromopt::{
    count_colorings_multipartite, obj, CounterexampleReport, RelaxedSolution, SolveReport, ThetaProfile, WeightVector,
};

use crate::verify::SuiteResult;
use crate::Output;

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(";")
}

pub fn solve(rep: &SolveReport, output: Output) -> String {
    match output {
        Output::Json => pretty(&rep.to_json()),
        Output::Csv => {
            let mut out = String::from("rank,kind,sizes,alphas,objective\n");
            for (i, p) in std::iter::once(&rep.best).chain(&rep.ties).enumerate() {
                let kind = match p.candidate.kind {
                    chromopt::CandidateKind::P => "P",
                    chromopt::CandidateKind::Q => "Q",
                };
                let sizes = p.candidate.sizes.iter().map(u32::to_string).collect::<Vec<_>>().join(";");
                out.push_str(&format!("{i},{kind},{sizes},{},{}\n", join(&p.alphas), fmt_f64(p.objective)));
            }
            out
        }
        Output::Text => {
            let mut out = format!("OPT_{}({}) = {}\n", rep.q, fmt_f64(rep.s), fmt_f64(rep.opt_value));
            out.push_str(&format!("support: {}\n", rep.best.candidate.to_json()));
            for (set, w) in rep.best.weight_vector().support() {
                out.push_str(&format!("  {:?}  {}\n", set.colors(), fmt_f64(w)));
            }
            if !rep.ties.is_empty() {
                out.push_str(&format!("ties: {}\n", rep.ties.len()));
            }
            out.push_str(&format!("candidates evaluated: {}\n", rep.candidates_evaluated));
            out
        }
    }
}

pub fn family(rep: &CounterexampleReport, output: Output) -> String {
    match output {
        Output::Json => pretty(&rep.to_json()),
        Output::Csv => format!(
            "s,t,r,q,X,Y,margin,hypothesis,valid\n{},{},{},{},{},{},{},{},{}\n",
            rep.s,
            rep.t,
            rep.r,
            rep.q,
            fmt_f64(rep.x),
            fmt_f64(rep.y),
            fmt_f64(rep.margin),
            rep.hypothesis,
            rep.valid
        ),
        Output::Text => {
            let mut out = format!("q = {}·{} + {} = {}\n", rep.s, rep.t, rep.r, rep.q);
            out.push_str(&format!("X (balanced)    = {}\n", fmt_f64(rep.x)));
            out.push_str(&format!("Y (constructed) = {}\n", fmt_f64(rep.y)));
            out.push_str(&format!("Y - X = {}{}\n", fmt_f64(rep.margin), if rep.margin_too_small { " (too small to call)" } else { "" }));
            out.push_str(&format!("range conditions: {}\n", rep.hypothesis));
            out.push_str(&format!("valid: {}\n", rep.valid));
            out
        }
    }
}

pub fn scan(s: u64, q0: u64, numeric: bool, list: &[u64], output: Output) -> String {
    match output {
        Output::Json => pretty(&json!({"s": s, "q0": q0, "numeric": numeric, "q": list})),
        Output::Csv => std::iter::once("q".to_string()).chain(list.iter().map(u64::to_string)).map(|l| l + "\n").collect(),
        Output::Text => list.iter().map(|q| format!("{q}\n")).collect(),
    }
}

pub fn embed(s: u32, q: u32, v: Option<&WeightVector>, output: Output) -> anyhow::Result<String> {
    let balanced = obj(&chromopt::balanced_vector(q, s)?)?;
    let embedded = v.map(obj).transpose()?;
    let gap = embedded.map(|e| e - balanced);
    Ok(match output {
        Output::Json => pretty(&json!({
            "s": s,
            "q": q,
            "valid": v.is_some(),
            "balanced_obj": json_f64(balanced),
            "embedded_obj": embedded.map(json_f64),
            "gap": gap.map(json_f64),
            "vector": v.map(serde_json::to_value).transpose()?,
        })),
        Output::Csv => format!(
            "s,q,balanced_obj,embedded_obj,gap\n{s},{q},{},{},{}\n",
            fmt_f64(balanced),
            embedded.map(fmt_f64).unwrap_or_default(),
            gap.map(fmt_f64).unwrap_or_default()
        ),
        Output::Text => match gap {
            Some(g) => format!(
                "balanced obj = {}\nembedded obj = {}\ngap = {}\n",
                fmt_f64(balanced),
                fmt_f64(embedded.unwrap_or(f64::NAN)),
                fmt_f64(g)
            ),
            None => "no embedding: the balanced vector lacks the classes to replace\n".into(),
        },
    })
}

fn rate(c: &CountResult, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    ln_big(&c.count) / n as f64
}

pub fn count(c: &CountResult, n: usize, output: Output) -> String {
    match output {
        Output::Json => pretty(&c.to_json(n)),
        Output::Csv => format!(
            "n,q,method,count,count_bits,log_rate\n{n},{},{},{},{},{}\n",
            c.q,
            c.method.as_str(),
            c.count,
            c.count.bits(),
            fmt_f64(rate(c, n))
        ),
        Output::Text => format!("{}\n", c.count),
    }
}

pub fn sweep(turan: usize, q: u32, ns: &[usize]) -> anyhow::Result<String> {
    let rows: Vec<String> = ns
        .par_iter()
        .map(|&n| -> anyhow::Result<String> {
            let c = count_colorings_multipartite(&turan_parts(n, turan)?, q)?;
            Ok(format!("{n},{q},{},{}\n", c.count.bits(), fmt_f64(rate(&c, n))))
        })
        .collect::<anyhow::Result<_>>()?;
    Ok(std::iter::once("n,q,count_bits,log_rate\n".to_string()).chain(rows).collect())
}

pub fn profile(p: &ThetaProfile, output: Output) -> String {
    match output {
        Output::Json => pretty(&json!({
            "s": json_f64(p.s),
            "points": p.points.iter().map(|&(t, f)| json!([json_f64(t), json_f64(f)])).collect::<Vec<_>>(),
            "d1_fd": json_f64(p.d1_fd),
            "d2_fd": json_f64(p.d2_fd),
            "d2_exact": json_f64(p.d2_exact),
        })),
        Output::Csv | Output::Text => p.to_csv(),
    }
}

pub fn relaxed(sol: &RelaxedSolution, s: f64, bound: f64, output: Output) -> String {
    match output {
        Output::Json => pretty(&json!({
            "s": json_f64(s),
            "k": sol.k,
            "delta": json_f64(sol.delta),
            "ell": sol.ell,
            "s_star": json_f64(sol.s_star),
            "alphas": sol.alphas.iter().map(|&a| json_f64(a)).collect::<Vec<_>>(),
            "F": json_f64(sol.f),
            "bound": json_f64(bound),
        })),
        Output::Csv => format!(
            "s,k,delta,ell,s_star,F,bound,alphas\n{},{},{},{},{},{},{},{}\n",
            fmt_f64(s),
            sol.k,
            fmt_f64(sol.delta),
            sol.ell,
            fmt_f64(sol.s_star),
            fmt_f64(sol.f),
            fmt_f64(bound),
            join(&sol.alphas)
        ),
        Output::Text => format!(
            "F = {}  (bound {}, -ln s = {})\nell = {}, s* = {}\nalphas: {}\n",
            fmt_f64(sol.f),
            fmt_f64(bound),
            fmt_f64(-s.ln()),
            sol.ell,
            fmt_f64(sol.s_star),
            join(&sol.alphas).replace(';', " ")
        ),
    }
}

pub fn verify(results: &[SuiteResult], output: Output) -> String {
    match output {
        Output::Json => pretty(&json!({
            "passed": results.iter().all(|r| r.passed),
            "suites": results.iter().map(|r| json!({
                "suite": r.name,
                "passed": r.passed,
                "checks": r.checks,
                "failures": r.failures,
            })).collect::<Vec<_>>(),
        })),
        Output::Csv => {
            let mut out = String::from("suite,passed,checks,failures\n");
            for r in results {
                out.push_str(&format!("{},{},{},{}\n", r.name, r.passed, r.checks, r.failures.len()));
            }
            out
        }
        Output::Text => {
            let mut out = String::new();
            for r in results {
                out.push_str(&format!("{:<15} {} ({} checks)\n", r.name, if r.passed { "pass" } else { "FAIL" }, r.checks));
                for f in &r.failures {
                    out.push_str(&format!("  {f}\n"));
                }
            }
            out
        }
    }
}
