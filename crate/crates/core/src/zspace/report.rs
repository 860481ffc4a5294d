use std::fmt::Write as _;

use num::complex::Complex64;
use serde::Serialize;

use crate::quad::Side;
use crate::zspace::geometry::AnnulusSpec;

/// Residual below which a channel counts as a member.
pub const MEMBER_TOL: f64 = 1e-8;
/// Residual above which a channel counts as a non-member.
pub const NON_MEMBER_TOL: f64 = 1e-4;
/// A channel whose samples never exceed this fraction of `sup |f|` on the
/// same sphere is treated as identically zero.
pub const NEGLIGIBLE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Every sampled mean vanished.
    Consistent,
    /// Some sampled mean is clearly nonzero.
    Inconsistent,
    Member,
    NonMember,
    Inconclusive,
}

impl Verdict {
    /// 0 for a positive verdict, 2 for a negative one, 3 when undecided.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Consistent | Verdict::Member => 0,
            Verdict::Inconsistent | Verdict::NonMember => 2,
            Verdict::Inconclusive => 3,
        }
    }

    pub fn is_positive(self) -> bool {
        self.exit_code() == 0
    }

    pub fn is_negative(self) -> bool {
        self.exit_code() == 2
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairRecord {
    pub z: Vec<[f64; 2]>,
    pub s: f64,
    pub side: &'static str,
    pub mean_re: f64,
    pub mean_im: f64,
    /// `sup |f|` over the nodes of this sphere.
    pub sphere_sup: f64,
}

impl PairRecord {
    pub fn new(z: &[Complex64], s: f64, side: Side, mean: Complex64, sphere_sup: f64) -> Self {
        let side = match side {
            Side::Right => "right",
            Side::Left => "left",
            Side::Euclidean => "euclidean",
        };
        Self { z: z.iter().map(|c| [c.re, c.im]).collect(), s, side, mean_re: mean.re, mean_im: mean.im, sphere_sup }
    }

    pub fn abs_mean(&self) -> f64 {
        self.mean_re.hypot(self.mean_im)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitRecord {
    pub p: u32,
    pub q: u32,
    pub j: usize,
    pub coeffs: Vec<[f64; 2]>,
    pub residual: f64,
    pub conditioning: f64,
    pub ill_conditioned: bool,
    /// All samples sat below the noise floor; residual reported as 0.
    pub negligible: bool,
}

/// Samples of `a_j^{p,q}` and `ã_j^{p,q}` on the radial grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelTable {
    pub p: u32,
    pub q: u32,
    pub j: usize,
    pub grid: Vec<f64>,
    pub a: Vec<Complex64>,
    pub a_tilde: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipReport {
    pub kind: &'static str,
    pub annulus: AnnulusSpec,
    pub lambda: f64,
    pub pairs: Vec<PairRecord>,
    pub max_abs_mean: f64,
    pub scale: f64,
    pub fits: Vec<FitRecord>,
    pub verdict: Verdict,
    pub flags: Vec<String>,
    #[serde(skip)]
    pub tables: Vec<ChannelTable>,
}

impl MembershipReport {
    pub fn max_residual(&self) -> f64 {
        self.fits.iter().map(|f| f.residual).fold(0.0, f64::max)
    }

    pub fn fit(&self, p: u32, q: u32) -> impl Iterator<Item = &FitRecord> {
        self.fits.iter().filter(move |f| f.p == p && f.q == q)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `z_1_re,z_1_im,…,s,side,mean_re,mean_im`.
    pub fn means_csv(&self) -> String {
        let n = self.annulus.n;
        let mut out = String::new();
        for k in 1..=n {
            let _ = write!(out, "z{k}_re,z{k}_im,");
        }
        out.push_str("s,side,mean_re,mean_im\n");
        for p in &self.pairs {
            for c in &p.z {
                let _ = write!(out, "{},{},", c[0], c[1]);
            }
            let _ = writeln!(out, "{},{},{},{}", p.s, p.side, p.mean_re, p.mean_im);
        }
        out
    }

    /// One CSV per `(p, q)`: `rho,j,a_re,a_im,atilde_re,atilde_im`.
    pub fn coefficient_csvs(&self) -> Vec<((u32, u32), String)> {
        let mut out: Vec<((u32, u32), String)> = Vec::new();
        for t in &self.tables {
            let key = (t.p, t.q);
            if out.last().map(|(k, _)| *k) != Some(key) {
                out.push((key, String::from("rho,j,a_re,a_im,atilde_re,atilde_im\n")));
            }
            let buf = &mut out.last_mut().expect("just pushed").1;
            for ((r, a), at) in t.grid.iter().zip(&t.a).zip(&t.a_tilde) {
                let _ = writeln!(buf, "{},{},{},{},{},{}", r, t.j, a.re, a.im, at.re, at.im);
            }
        }
        out
    }
}

/// Three-way verdict from fit residuals; ill-conditioned fits never count
/// as members.
pub fn fit_verdict(fits: &[FitRecord]) -> Verdict {
    if fits.iter().any(|f| f.residual > NON_MEMBER_TOL) {
        return Verdict::NonMember;
    }
    if fits.iter().all(|f| f.residual < MEMBER_TOL && (f.negligible || !f.ill_conditioned)) {
        Verdict::Member
    } else {
        Verdict::Inconclusive
    }
}

/// Three-way verdict for sampled means against `tol·scale`.
pub fn mean_verdict(max_abs_mean: f64, scale: f64, tol: f64) -> Verdict {
    if max_abs_mean <= tol * scale {
        Verdict::Consistent
    } else if max_abs_mean > NON_MEMBER_TOL * scale {
        Verdict::Inconsistent
    } else {
        Verdict::Inconclusive
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit(residual: f64, ill: bool) -> FitRecord {
        FitRecord { p: 1, q: 0, j: 1, coeffs: vec![], residual, conditioning: 1.0, ill_conditioned: ill, negligible: false }
    }

    #[test]
    fn verdict_rules() {
        assert_eq!(fit_verdict(&[fit(1e-12, false), fit(0.0, false)]), Verdict::Member);
        assert_eq!(fit_verdict(&[fit(1e-12, true)]), Verdict::Inconclusive);
        assert_eq!(fit_verdict(&[fit(1e-6, false)]), Verdict::Inconclusive);
        assert_eq!(fit_verdict(&[fit(1e-12, false), fit(0.5, false)]), Verdict::NonMember);
        assert_eq!(fit_verdict(&[]), Verdict::Member);
        assert_eq!(mean_verdict(1e-12, 1.0, 1e-8), Verdict::Consistent);
        assert_eq!(mean_verdict(1e-2, 1.0, 1e-8), Verdict::Inconsistent);
        assert_eq!(mean_verdict(1e-6, 1.0, 1e-8), Verdict::Inconclusive);
        assert_eq!(mean_verdict(0.0, 0.0, 1e-8), Verdict::Consistent);
        assert_eq!(Verdict::NonMember.exit_code(), 2);
    }

    #[test]
    fn json_shape() {
        let report = MembershipReport {
            kind: "membership",
            annulus: AnnulusSpec::new(2, 1.0, None).unwrap(),
            lambda: 1.0,
            pairs: vec![PairRecord::new(&[Complex64::new(0.5, 0.0), Complex64::new(0.0, -1.0)], 2.0, Side::Right, Complex64::new(1e-17, 0.0), 3.0)],
            max_abs_mean: 1e-17,
            scale: 3.0,
            fits: vec![],
            verdict: Verdict::Consistent,
            flags: vec![],
            tables: vec![],
        };
        let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(v["annulus"]["R"], "inf");
        assert_eq!(v["verdict"], "consistent");
        assert_eq!(v["pairs"][0]["z"][1][1], -1.0);
        assert!(report.means_csv().starts_with("z1_re,z1_im,z2_re,z2_im,s,side,mean_re,mean_im\n0.5,0,0,-1,2,right,"));
    }
}
