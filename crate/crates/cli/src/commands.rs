use std::collections::BTreeMap;
use std::path::Path;

use fcl_core::disc::{
    boundary_coefficient, log_discrepancy, prime_divisors, solve_gorenstein, solve_gorenstein_with, DivisorSpec,
};
use fcl_core::exactgeom::{fmt_q, parse_q, RationalVector, Q};
use fcl_core::hyper::{
    acting_subspace, check_conditions, degeneration_cone, degeneration_family, kss_obstruction, minimize_multigraded,
    nvol_multigraded, nvol_weighted, screen, t1_support, MultigradedHypersurface, ScreenCaps, WeightSystem,
};
use fcl_core::kollar::{horizontal_component, mld_bound_witness, sigma_z, vertical_component};
use fcl_core::pdiv::{PDivisor, PDivisorInput};
use fcl_core::toricvol::{
    log_discrepancy_xi, minimize_nvol, minimize_nvol_numeric, nvol_xi, toric_gorenstein, volume_xi, BoundaryEntry,
    ToricConeInput,
};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::report::show_q;
use crate::selftest::{run_selftest, SelftestOptions};
use crate::{CliError, CliResult};

pub struct Context {
    pub seed: u64,
    pub tol: Q,
}

/// What a command produced, before it is wrapped into a report.
#[derive(Default)]
pub struct Output {
    pub input: Option<Value>,
    pub results: Value,
    pub certificates: Value,
    pub warnings: Vec<String>,
    /// Rows of the human table.
    pub rows: Vec<(String, String)>,
    /// Verbatim human output replacing the table (CSV).
    pub raw: Option<String>,
    /// Set when the command ran but its checks failed.
    pub failure: Option<String>,
}

impl Output {
    fn row(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.rows.push((key.into(), value.into()));
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_json<T: DeserializeOwned>(text: &str, what: impl Into<String>) -> CliResult<T> {
    serde_json::from_str(text).map_err(|source| CliError::Json {
        what: what.into(),
        source,
    })
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    parse_json(&read_file(path)?, path.display().to_string())
}

/// Parses `1,2,2`, `(1,2,2)` or `[1, "1/2", 2]`.
pub fn parse_vector(s: &str) -> CliResult<RationalVector> {
    let t = s.trim();
    if t.starts_with('[') {
        return parse_json(t, format!("vector {t:?}"));
    }
    let inner = t.trim_start_matches('(').trim_end_matches(')');
    if inner.trim().is_empty() {
        return Err(CliError::Usage(format!("empty vector {s:?}")));
    }
    let coords = inner
        .split(',')
        .map(|x| parse_q(x.trim().trim_matches('"')))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RationalVector::new(coords))
}

fn load_pdiv(path: &Path) -> CliResult<(PDivisorInput, PDivisor, fcl_core::pdiv::Boundary)> {
    let input: PDivisorInput = read_json(path)?;
    let (d, delta) = input.build()?;
    Ok((input, d, delta))
}

pub fn dispatch(cmd: &Command, ctx: &Context) -> CliResult<Output> {
    match cmd {
        Command::Pdiv(a) => pdiv(a),
        Command::Discrepancy(a) => discrepancy(a),
        Command::Kollar(a) => kollar(a),
        Command::Nvol(a) => nvol(a, ctx),
        Command::Hyper(HyperCommand::Nvol(a)) => hyper_nvol(a),
        Command::Hyper(HyperCommand::Conditions(a)) => hyper_conditions(a),
        Command::Hyper(HyperCommand::Screen(a)) => hyper_screen(a),
        Command::Hyper(HyperCommand::Degeneration(a)) => hyper_degeneration(a),
        Command::Selftest(a) => selftest(a, ctx),
    }
}

fn pdiv(a: &PdivArgs) -> CliResult<Output> {
    let (input, d, delta) = load_pdiv(&a.input)?;
    let mut out = Output {
        input: Some(to_value(&input)),
        ..Output::default()
    };
    let proper = d.is_proper();
    let tt = d.type_triple();
    let qp = d.quotient_pair(&delta);
    let klt = d.is_klt(&delta);
    let mut results = json!({
        "rank": d.rank(),
        "labels": d.labels().collect::<Vec<_>>(),
        "proper": proper,
        "type": tt,
        "platonic": tt.is_platonic(),
        "quotient_pair": qp,
        "klt": klt,
        "free_rays": d.free_rays(),
    });
    out.row("proper", format!("{} ({})", proper.proper, proper.reason));
    out.row(
        "type",
        format!("{tt}{}", if tt.is_platonic() { ", platonic" } else { "" }),
    );
    let bs: Vec<String> = qp.b.iter().map(|(y, b)| format!("{y}: {}", fmt_q(b))).collect();
    out.row(
        "quotient pair",
        format!("b = {{{}}}, Σb = {}", bs.join(", "), show_q(&qp.degree)),
    );
    out.row("klt", klt.to_string());
    match solve_gorenstein(&d, &delta) {
        Ok(g) => {
            out.row("u", g.u.to_string());
            let mut primes = Vec::new();
            for p in prime_divisors(&d) {
                let a = log_discrepancy(&g, &d, &delta, &p)?;
                out.row(format!("a({p})"), show_q(&a));
                primes.push(json!({ "divisor": p, "a": fmt_q(&a) }));
            }
            results["gorenstein"] = to_value(&g);
            results["prime_divisors"] = Value::Array(primes);
        }
        Err(e) if !e.is_input_error() => out.warnings.push(e.to_string()),
        Err(e) => return Err(e.into()),
    }
    out.results = results;
    Ok(out)
}

fn discrepancy(a: &DiscrepancyArgs) -> CliResult<Output> {
    let (input, d, delta) = load_pdiv(&a.input)?;
    let mut out = Output::default();
    let mut echo = json!({ "pdiv": input });
    let g = match &a.canonical {
        Some(k) => {
            let k: BTreeMap<String, i64> = parse_json(k, "--canonical")?;
            echo["canonical"] = to_value(&k);
            solve_gorenstein_with(&d, &delta, &k)?
        }
        None => solve_gorenstein(&d, &delta)?,
    };
    let specs: Vec<DivisorSpec> = if a.divisors.is_empty() {
        prime_divisors(&d)
    } else {
        let s = a
            .divisors
            .iter()
            .map(|t| parse_json(t, "--divisor"))
            .collect::<CliResult<Vec<DivisorSpec>>>()?;
        echo["divisors"] = to_value(&s);
        s
    };
    out.input = Some(echo);
    out.row("u", g.u.to_string());
    let mut list = Vec::new();
    for s in &specs {
        let value = log_discrepancy(&g, &d, &delta, s)?;
        let c = boundary_coefficient(&delta, s);
        out.row(format!("a({s})"), show_q(&value));
        list.push(json!({ "divisor": s, "a": fmt_q(&value), "boundary_coefficient": fmt_q(&c) }));
    }
    out.results = json!({ "gorenstein": g, "discrepancies": list });
    Ok(out)
}

fn kollar(a: &KollarArgs) -> CliResult<Output> {
    let (input, d, delta) = load_pdiv(&a.input)?;
    let mut out = Output {
        input: Some(to_value(&input)),
        ..Output::default()
    };
    let explicit = !a.vertical.is_empty() || !a.horizontal.is_empty() || !a.sigma.is_empty();
    let mut results = serde_json::Map::new();
    if a.mld_bound || !explicit {
        let eps = match &a.eps {
            Some(e) => parse_q(e)?,
            None => delta.min_positive_coefficient(),
        };
        let w = mld_bound_witness(&d, &delta, &eps)?;
        out.row("branch", w.branch.to_string());
        out.row("type", w.type_triple.to_string());
        out.row("witness", w.spec.to_string());
        out.row("discrepancy", show_q(&w.discrepancy));
        out.row("bound", show_q(&w.bound));
        out.row("certified", w.certified.to_string());
        out.warnings.extend(w.diagnostics.iter().cloned());
        results.insert(
            "mld_bound".into(),
            json!({
                "branch": w.branch,
                "discrepancy": fmt_q(&w.discrepancy),
                "bound": fmt_q(&w.bound),
                "certified": w.certified,
            }),
        );
        out.certificates = json!({ "mld_bound": w });
    }
    let mut verticals = Vec::new();
    for v in &a.vertical {
        let (z, w) = v
            .split_once(':')
            .ok_or_else(|| CliError::Usage(format!("--vertical expects z:w, got {v:?}")))?;
        let w = parse_vector(w)?;
        let c = vertical_component(&d, &delta, z, &w)?;
        out.row(
            format!("D_({z}, {w})"),
            format!(
                "a = {}, Kollár: {}, Σ_(y≠z) b = {}",
                show_q(&c.discrepancy),
                c.is_kollar,
                fmt_q(&c.rest_b)
            ),
        );
        verticals.push(json!({ "point": z, "w": w, "component": c }));
    }
    if !verticals.is_empty() {
        results.insert("vertical".into(), Value::Array(verticals));
    }
    let mut horizontals = Vec::new();
    for n in &a.horizontal {
        let c = horizontal_component(&d, &delta, &parse_vector(n)?)?;
        out.row(
            format!("D_ρ, ρ = ray{}", c.ray),
            format!("a = {}, Kollár: {}", show_q(&c.discrepancy), c.is_kollar),
        );
        horizontals.push(to_value(&c));
    }
    if !horizontals.is_empty() {
        results.insert("horizontal".into(), Value::Array(horizontals));
    }
    let mut sigmas = serde_json::Map::new();
    for z in &a.sigma {
        let s = sigma_z(&d, &delta, z)?;
        out.row(
            format!("Σ_{z}"),
            format!(
                "{} rays, heights in [{}, {}]",
                s.rays.len(),
                fmt_q(&s.min_height()),
                fmt_q(&s.max_height())
            ),
        );
        sigmas.insert(z.clone(), to_value(&s));
    }
    if !sigmas.is_empty() {
        results.insert("sigma".into(), Value::Object(sigmas));
    }
    out.results = Value::Object(results);
    Ok(out)
}

fn toric_input(a: &NvolArgs) -> CliResult<ToricConeInput> {
    if let Some(p) = &a.input {
        return read_json(p);
    }
    let rays: Vec<RationalVector> = parse_json(a.rays.as_deref().unwrap_or("[]"), "--rays")?;
    let lattice = a.lattice.as_deref().map(|l| parse_json(l, "--lattice")).transpose()?;
    let boundary: Vec<BoundaryEntry> = a
        .boundary
        .as_deref()
        .map(|b| parse_json(b, "--boundary"))
        .transpose()?
        .unwrap_or_default();
    Ok(ToricConeInput {
        rays,
        lattice,
        boundary,
    })
}

fn nvol(a: &NvolArgs, ctx: &Context) -> CliResult<Output> {
    let input = toric_input(a)?;
    let t = input.build()?;
    let mut out = Output {
        input: Some(to_value(&input)),
        ..Output::default()
    };
    let mut results = serde_json::Map::new();
    let form = toric_gorenstein(&t)?;
    results.insert("gorenstein_form".into(), to_value(&form));
    out.row("log discrepancy form", form.to_string());
    let mut evals = Vec::new();
    for x in &a.xi {
        let xi = parse_vector(x)?;
        let value = nvol_xi(&t, &xi)?;
        let ax = log_discrepancy_xi(&t, &form, &xi)?;
        let vol = volume_xi(&t, &xi)?;
        out.row(
            format!("ξ = {xi}"),
            format!(
                "nvol = {}, A = {}, vol = {}",
                value.finite().map_or("+∞".into(), show_q),
                fmt_q(&ax),
                fmt_q(&vol)
            ),
        );
        evals.push(json!({ "xi": xi, "nvol": value, "log_discrepancy": fmt_q(&ax), "volume": fmt_q(&vol) }));
    }
    if !evals.is_empty() {
        results.insert("evaluations".into(), Value::Array(evals));
    }
    if a.minimize || a.xi.is_empty() {
        let r = if a.numeric {
            minimize_nvol_numeric(&t, &ctx.tol)?
        } else {
            minimize_nvol(&t, &ctx.tol)?
        };
        out.row("ξ*", r.xi_star.to_string());
        if r.lower == r.upper {
            out.row("minimum", show_q(&r.upper));
        } else {
            out.row("minimum", format!("in [{}, {}]", show_q(&r.lower), show_q(&r.upper)));
        }
        out.row(
            "method",
            if r.simplicial_exact {
                "simplicial, exact"
            } else {
                "numeric descent"
            },
        );
        if !r.within_tolerance {
            out.warnings.push(format!(
                "enclosure width {} exceeds the tolerance {}",
                fmt_q(&r.width()),
                fmt_q(&ctx.tol)
            ));
        }
        let mut m = to_value(&r);
        if r.lower == r.upper {
            m["value"] = Value::String(fmt_q(&r.upper));
        }
        results.insert("minimum".into(), m);
    }
    out.results = Value::Object(results);
    Ok(out)
}

fn parse_weights(s: &str) -> CliResult<WeightSystem> {
    Ok(s.parse::<WeightSystem>()?)
}

fn hyper_nvol(a: &HyperNvolArgs) -> CliResult<Output> {
    let mut out = Output::default();
    if let Some(w) = &a.weights {
        let ws = parse_weights(w)?;
        let v = nvol_weighted(&ws)?;
        out.input = Some(json!({ "weights": ws }));
        out.row(ws.to_string(), format!("nvol = {}", show_q(&v)));
        out.results = json!({ "weights": ws, "nvol": fmt_q(&v) });
        return Ok(out);
    }
    let path = a.input.as_ref().expect("clap requires --weights or --input");
    let h: MultigradedHypersurface = read_json(path)?;
    h.validate()?;
    out.input = Some(to_value(&h));
    let mut results = serde_json::Map::new();
    let mut evals = Vec::new();
    for x in &a.xi {
        let xi = parse_vector(x)?;
        let v = nvol_multigraded(&h, &xi)?;
        let ws = h.weights_at(&xi)?;
        out.row(format!("ξ = {xi}"), format!("nvol = {}, weights {ws}", show_q(&v)));
        evals.push(json!({ "xi": xi, "nvol": fmt_q(&v), "weights": ws }));
    }
    if !evals.is_empty() {
        results.insert("evaluations".into(), Value::Array(evals));
    }
    if a.minimize || a.xi.is_empty() {
        let m = minimize_multigraded(&h)?;
        out.row("ξ*", m.xi_star.to_string());
        out.row("minimum", show_q(&m.value));
        out.row("weights at ξ*", m.weights.to_string());
        if !m.exact {
            out.warnings
                .push("the rational minimizer does not satisfy the critical-point equations exactly".into());
        }
        results.insert("minimum".into(), to_value(&m));
    }
    out.results = Value::Object(results);
    Ok(out)
}

fn hyper_conditions(a: &ConditionsArgs) -> CliResult<Output> {
    let ws = parse_weights(&a.weights)?;
    let v = parse_q(&a.volume)?;
    let c = check_conditions(&ws, &v);
    let mut out = Output {
        input: Some(json!({ "weights": ws, "volume": fmt_q(&v) })),
        ..Output::default()
    };
    out.row("log terminal (Σw − d > 0)", c.log_terminal.to_string());
    out.row("Lichnerowicz (Σw − d ≤ n·w₀)", c.lichnerowicz.to_string());
    out.row("nondegenerate (w₀ + wₙ ≤ d)", c.nondegenerate.to_string());
    out.row(
        format!("volume (nvol ≥ {})", fmt_q(&v)),
        format!(
            "{}{}",
            c.volume,
            c.nvol
                .as_ref()
                .map_or(String::new(), |x| format!(", nvol = {}", show_q(x)))
        ),
    );
    out.row("all", c.all().to_string());
    out.results = json!({ "conditions": c, "all": c.all() });
    Ok(out)
}

fn hyper_screen(a: &ScreenArgs) -> CliResult<Output> {
    let v = parse_q(&a.volume)?;
    let caps = ScreenCaps {
        max_degree: a.max_degree,
        max_weight: a.max_weight,
    };
    let r = screen(a.dim, &v, caps)?;
    let mut out = Output {
        input: Some(json!({ "dim": a.dim, "volume": fmt_q(&v), "caps": caps })),
        ..Output::default()
    };
    out.row("candidates", r.candidates.len().to_string());
    let list: Vec<String> = r
        .candidates
        .iter()
        .map(|c| format!("{}  nvol = {}", c.weights, show_q(&c.nvol)))
        .collect();
    out.row("", list.join("\n"));
    out.row("tuples visited", r.visited.to_string());
    if !r.quiet_at_cap {
        out.warnings.push(format!(
            "candidates reach the degree cap {}; raise --max-degree",
            a.max_degree
        ));
    }
    if a.csv {
        out.raw = Some(r.to_csv());
    }
    out.results = to_value(&r);
    Ok(out)
}

fn hyper_degeneration(a: &DegenerationArgs) -> CliResult<Output> {
    let mut out = Output::default();
    let Some(path) = &a.input else {
        let r = degeneration_family(a.max_exponent)?;
        out.input = Some(json!({ "max_exponent": a.max_exponent }));
        out.row("ξ*", r.xi_star.to_string());
        for m in &r.members {
            out.row(
                format!("e = {}", m.exponent),
                format!(
                    "degree {}, Σ_X dual of the ray: {}, ξ* ∈ rint Σ_X: {}, fires: {}",
                    m.kernel_degree, m.sigma_x_is_dual_of_ray, m.obstruction.in_degeneration_cone, m.obstruction.fires
                ),
            );
        }
        out.row(
            "computed threshold",
            r.computed_threshold.map_or("none".into(), |t| format!("e ≥ {t}")),
        );
        out.row(
            "stated threshold",
            format!("{} ({})", r.stated_threshold, r.stated_indexing),
        );
        out.results = to_value(&r);
        return Ok(out);
    };
    let mut h: MultigradedHypersurface = read_json(path)?;
    if let Some(m) = &a.monomials {
        h.monomials = Some(parse_json(m, "--monomials")?);
    }
    h.validate()?;
    let kernel: Vec<RationalVector> = parse_json(a.kernel.as_deref().expect("clap requires --kernel"), "--kernel")?;
    out.input = Some(json!({ "hypersurface": h, "kernel": kernel, "height_cap": a.height_cap }));
    let support = t1_support(&h, &kernel, a.height_cap)?;
    let degrees: Vec<RationalVector> = support.iter().map(|s| s.u.clone()).collect();
    for s in &support {
        let ms: Vec<String> = s.monomials.iter().map(|m| monomial(m)).collect();
        out.row(format!("T¹({})", s.u), ms.join(", "));
    }
    if degrees.is_empty() {
        out.warnings.push(format!("no T¹ degree up to height {}", a.height_cap));
        out.results = json!({ "t1_support": support });
        return Ok(out);
    }
    let data = degeneration_cone(&degrees, h.rank())?;
    let xi = match &a.xi {
        Some(x) => parse_vector(x)?,
        None => minimize_multigraded(&h)?.xi_star,
    };
    let n_span = acting_subspace(&kernel, h.rank());
    let ob = kss_obstruction(&h.reeb_cone()?, &data, &xi, &n_span)?;
    let normals: Vec<String> = data.sigma_x.facets().iter().map(|f| f.to_string()).collect();
    out.row("Σ_X facet normals", normals.join(" "));
    out.row("ξ", xi.to_string());
    out.row("ξ ∈ rint Σ_X", ob.in_degeneration_cone.to_string());
    out.row("ξ ∈ N_R", ob.in_subtorus.to_string());
    out.row("obstruction fires", ob.fires.to_string());
    out.results = json!({ "t1_support": support, "degeneration_cone": data, "obstruction": ob });
    Ok(out)
}

fn monomial(m: &[u32]) -> String {
    let vars: Vec<String> = m
        .iter()
        .enumerate()
        .filter(|(_, e)| **e > 0)
        .map(|(i, e)| if *e == 1 { format!("x{i}") } else { format!("x{i}^{e}") })
        .collect();
    if vars.is_empty() {
        "1".into()
    } else {
        vars.join("·")
    }
}

fn selftest(a: &SelftestArgs, ctx: &Context) -> CliResult<Output> {
    if let Some(f) = &a.filter {
        let known = crate::selftest::filter_values();
        for part in f.split(',').map(str::trim) {
            if !known.contains(part) {
                let list: Vec<&str> = known.iter().map(String::as_str).collect();
                return Err(CliError::Usage(format!(
                    "unknown filter {part:?}; expected one of {}",
                    list.join(", ")
                )));
            }
        }
    }
    let opts = SelftestOptions {
        seed: ctx.seed,
        instances: a.n,
        kernel_cases: a.kernel_cases,
        filter: a.filter.clone(),
    };
    let report = run_selftest(&opts);
    let mut out = Output {
        input: Some(
            json!({ "seed": opts.seed, "n": opts.instances, "kernel_cases": opts.kernel_cases, "filter": opts.filter }),
        ),
        ..Output::default()
    };
    let lines: Vec<String> = report.criteria.iter().map(|c| c.line()).collect();
    out.raw = Some(format!("{}\n", lines.join("\n")));
    let failed: Vec<String> = report
        .criteria
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.id.to_string())
        .collect();
    if !failed.is_empty() {
        out.failure = Some(format!("criteria {} failed", failed.join(", ")));
    }
    out.results = to_value(&report);
    Ok(out)
}
