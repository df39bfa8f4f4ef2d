//! CSV tables and gnuplot-style data blocks.

use std::fmt::Write as _;

use fracbeam::bench::ReportRow;

pub const FIELD_HEADER: &str = "x,w,w_norm,dwdx,u,N,M";
pub const STRESS_HEADER: &str = "x3,sigma11_norm";
pub const REPORT_HEADER: &str = "alpha,lf,Ne,element,w_max_norm,err_rel,runtime_s";

/// Nine significant digits, fixed notation for moderate magnitudes and
/// exponent notation otherwise, trailing zeros removed.
pub fn sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn optional(v: Option<f64>) -> String {
    v.map(sig9).unwrap_or_default()
}

/// One node of the solved field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldRow {
    pub x: f64,
    pub w: f64,
    pub w_norm: f64,
    pub dwdx: f64,
    pub u: f64,
    pub n: f64,
    pub m: f64,
}

pub fn field_csv(rows: &[FieldRow]) -> String {
    let mut out = format!("{FIELD_HEADER}\n");
    for r in rows {
        let cells = [r.x, r.w, r.w_norm, r.dwdx, r.u, r.n, r.m].map(sig9);
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn stress_csv(rows: &[(f64, f64)]) -> String {
    let mut out = format!("{STRESS_HEADER}\n");
    for &(x3, s) in rows {
        let _ = writeln!(out, "{},{}", sig9(x3), sig9(s));
    }
    out
}

/// Report table; the runtime column is left empty unless `timing` is set.
pub fn report_csv(rows: &[ReportRow], timing: bool) -> String {
    let mut out = format!("{REPORT_HEADER}\n");
    for r in rows {
        let runtime = if timing { sig9(r.runtime_s) } else { String::new() };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            sig9(r.alpha),
            sig9(r.lf),
            r.ne,
            r.element,
            sig9(r.w_max_norm),
            optional(r.err_rel),
            runtime
        );
    }
    out
}

/// Two-column blocks separated by blank lines, each headed by a comment.
pub fn plot_blocks(blocks: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut out = String::new();
    for (i, (title, points)) in blocks.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        let _ = writeln!(out, "# {title}");
        for &(a, b) in points {
            let _ = writeln!(out, "{} {}", sig9(a), sig9(b));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use fracbeam::ElementKind;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(1.0523), "1.0523");
        assert_eq!(sig9(2.0 / 3.0), "0.666666667");
        assert_eq!(sig9(123456789.4), "123456789");
        assert_eq!(sig9(1234567890.0), "1.23456789e9");
        assert_eq!(sig9(-3.25e-7), "-3.25e-7");
        assert_eq!(sig9(1e-5), "0.00001");
        assert_eq!(sig9(0.0), "0");
    }

    #[test]
    fn report_layout() {
        let row = ReportRow {
            alpha: 0.8,
            lf: 0.1,
            ne: 100,
            element: ElementKind::TwoNoded,
            w_max_norm: 1.05234,
            err_rel: None,
            stress_err_rel: None,
            reference: None,
            runtime_s: 0.5,
        };
        let text = report_csv(std::slice::from_ref(&row), false);
        assert_eq!(text, "alpha,lf,Ne,element,w_max_norm,err_rel,runtime_s\n0.8,0.1,100,two-noded,1.05234,,\n");
        assert!(report_csv(&[row], true).ends_with(",,0.5\n"));
    }

    #[test]
    fn blocks_are_blank_line_separated() {
        let text = plot_blocks(&[("a".into(), vec![(0.0, 1.0)]), ("b".into(), vec![(1.0, 2.0)])]);
        assert_eq!(text, "# a\n0 1\n\n\n# b\n1 2\n");
    }
}
