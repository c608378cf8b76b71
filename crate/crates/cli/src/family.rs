//! Builds two-copy arrangements from validated family parameters.

use ssrbell::optics::MAX_SECTOR_TOTAL;
use ssrbell::{
    bec_state, noon_state, squeezed_state, toy_mixed_state, two_copy, Complex64, PureState, TwoCopyArrangement,
};

use crate::config::FamilyParams;
use crate::error::{CliError, Result};

fn check_size(n: usize) -> Result<()> {
    if n > MAX_SECTOR_TOTAL {
        return Err(CliError::invalid(format!(
            "particle number {n} exceeds the supported maximum {MAX_SECTOR_TOTAL}"
        )));
    }
    Ok(())
}

/// Parses a two-mode state written as `n,m:re[:im]` terms separated by `;`,
/// for example `2,0:1; 0,2:1`. The result is normalized.
pub fn parse_custom_state(text: &str) -> Result<PureState> {
    let mut terms = Vec::new();
    for raw in text.split(';') {
        let term = raw.trim();
        if term.is_empty() {
            continue;
        }
        let bad = |why: &str| CliError::invalid(format!("state term `{term}`: {why}"));
        let mut fields = term.split(':').map(str::trim);
        let label = fields.next().unwrap_or("");
        let re = fields.next().ok_or_else(|| bad("expected `n,m:re[:im]`"))?;
        let im = fields.next().unwrap_or("0");
        if fields.next().is_some() {
            return Err(bad("too many `:` fields"));
        }
        let (n, m) = label.split_once(',').ok_or_else(|| bad("label must be `n,m`"))?;
        let n: usize = n.trim().parse().map_err(|_| bad("bad occupation"))?;
        let m: usize = m.trim().parse().map_err(|_| bad("bad occupation"))?;
        check_size(n.saturating_add(m))?;
        let re: f64 = re.parse().map_err(|_| bad("bad real part"))?;
        let im: f64 = im.parse().map_err(|_| bad("bad imaginary part"))?;
        if !(re.is_finite() && im.is_finite()) {
            return Err(bad("amplitude must be finite"));
        }
        terms.push((vec![n, m], Complex64::new(re, im)));
    }
    if terms.is_empty() {
        return Err(CliError::invalid("custom state has no terms"));
    }
    let total = terms[0].0[0] + terms[0].0[1];
    if terms.iter().any(|(v, _)| v[0] + v[1] != total) {
        return Err(CliError::invalid("custom state terms must share one particle number"));
    }
    // merge repeated labels before normalizing
    let mut merged = vec![Complex64::new(0.0, 0.0); total + 1];
    for (v, a) in &terms {
        merged[v[1]] += a;
    }
    let norm = merged.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 1e-12) {
        return Err(CliError::invalid("custom state has zero or non-finite norm"));
    }
    let terms = merged
        .into_iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(m, a)| (vec![total - m, m], a / norm));
    Ok(PureState::from_terms(terms)?)
}

/// The two-copy state described by `params`.
pub fn arrangement(params: &FamilyParams) -> Result<TwoCopyArrangement> {
    let state = match params {
        FamilyParams::Bec { n, n2 } => {
            check_size(*n)?;
            check_size(n2.unwrap_or(*n))?;
            two_copy(bec_state(*n)?, bec_state(n2.unwrap_or(*n))?)?
        }
        FamilyParams::Noon { n, m, n2 } => {
            check_size(*n)?;
            check_size(n2.unwrap_or(*n))?;
            two_copy(noon_state(*n, *m)?, noon_state(n2.unwrap_or(*n), *m)?)?
        }
        FamilyParams::Squeezed { c } => {
            let s = squeezed_state(*c)?;
            two_copy(s.clone(), s)?
        }
        FamilyParams::ToyMixed { p } => {
            let s = toy_mixed_state(*p)?;
            two_copy(s.clone(), s)?
        }
        FamilyParams::Custom { state } => {
            let s = parse_custom_state(state)?;
            two_copy(s.clone(), s)?
        }
    };
    Ok(state)
}

/// The single-copy pure state, where the family has one.
pub fn single_copy(params: &FamilyParams) -> Result<PureState> {
    match params {
        FamilyParams::Bec { n, .. } => {
            check_size(*n)?;
            Ok(bec_state(*n)?)
        }
        FamilyParams::Noon { n, m, .. } => {
            check_size(*n)?;
            Ok(noon_state(*n, *m)?)
        }
        FamilyParams::Squeezed { c } => Ok(squeezed_state(*c)?),
        FamilyParams::Custom { state } => parse_custom_state(state),
        FamilyParams::ToyMixed { .. } => Err(CliError::invalid("toy_mixed is not a pure state")),
    }
}
