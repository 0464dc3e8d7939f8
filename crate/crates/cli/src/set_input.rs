//! Set arguments: the `disk:levelN:rR[:cX,Y]` shorthand, inline JSON, or
//! `@path` naming a JSON file.

use std::fs;

use num_complex::Complex64;
use whirly_core::tree::MAX_DEPTH;
use whirly_core::BorelSet;

use crate::error::{usage, CliError};

/// Parses `disk:levelN:rR` or `disk:levelN:rR:cX,Y` into a product of
/// identical disks at level `N`.
pub fn parse_shorthand(text: &str) -> Result<BorelSet, CliError> {
    let bad = |why: &str| usage(format!("bad set shorthand {text:?}: {why}"));
    let mut parts = text.split(':');
    if parts.next() != Some("disk") {
        return Err(bad("expected it to start with `disk:`"));
    }
    let level = parts
        .next()
        .and_then(|p| p.strip_prefix("level"))
        .ok_or_else(|| bad("expected `levelN`"))?
        .parse::<u32>()
        .map_err(|_| bad("level is not a non-negative integer"))?;
    if level > MAX_DEPTH {
        return Err(bad(&format!("level exceeds {MAX_DEPTH}")));
    }
    let radius = parts
        .next()
        .and_then(|p| p.strip_prefix('r'))
        .ok_or_else(|| bad("expected `rR`"))?
        .parse::<f64>()
        .map_err(|_| bad("radius is not a number"))?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(bad("radius must be positive and finite"));
    }
    let center = match parts.next() {
        None => Complex64::new(0.0, 0.0),
        Some(p) => {
            let (x, y) = p
                .strip_prefix('c')
                .and_then(|c| c.split_once(','))
                .ok_or_else(|| bad("expected `cX,Y`"))?;
            let x: f64 = x.parse().map_err(|_| bad("centre is not a number"))?;
            let y: f64 = y.parse().map_err(|_| bad("centre is not a number"))?;
            if !(x.is_finite() && y.is_finite()) {
                return Err(bad("centre must be finite"));
            }
            Complex64::new(x, y)
        }
    };
    if parts.next().is_some() {
        return Err(bad("trailing fields"));
    }
    Ok(BorelSet::disk(level, center, radius)?)
}

/// Shorthand, inline JSON (starting with `{`) or `@path`.
pub fn parse_set(arg: &str) -> Result<BorelSet, CliError> {
    let arg = arg.trim();
    if let Some(path) = arg.strip_prefix('@') {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read set file {path}: {e}")))?;
        parse_json(&text)
    } else if arg.starts_with('{') {
        parse_json(arg)
    } else {
        parse_shorthand(arg)
    }
}

fn parse_json(text: &str) -> Result<BorelSet, CliError> {
    BorelSet::from_json(text).map_err(|e| usage(format!("invalid set JSON: {e}")))
}
