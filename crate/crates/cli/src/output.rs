use std::fmt::Write as _;

use udw_witness::scan::ScanPoint;
use udw_witness::WitnessSeries64;

pub const SERIES_HEADER: &str = "tau,re_chi,im_chi,re_w,im_w,abs_w,violates";

/// Formats like C's `%.{digits}g`: shortest of fixed or exponent notation,
/// trailing zeros removed.
pub fn fmt_g(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn g(x: f64) -> String {
    fmt_g(x, 12)
}

pub fn series_csv(series: &WitnessSeries64) -> String {
    let mut out = String::with_capacity(series.len() * 96);
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for i in 0..series.len() {
        let (cr, ci) = series.chi[i]
            .as_ref()
            .map_or((f64::NAN, f64::NAN), |c| (c.value.re, c.value.im));
        let w = series.w_complex[i];
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            g(series.taus[i]),
            g(cr),
            g(ci),
            g(w.re),
            g(w.im),
            g(series.w_abs[i]),
            series.violates[i]
        )
        .expect("writing to a String");
    }
    out
}

pub fn scan_csv(param: &str, metric: &str, points: &[ScanPoint<f64>]) -> String {
    let mut out = format!("{param},{metric}\n");
    for p in points {
        writeln!(out, "{},{}", g(p.param), g(p.metric)).expect("writing to a String");
    }
    out
}
