//! The full classification run on a germ and its JSON report.

use serde::Serialize;

use crate::endo::{analyze, one_sided_trace_kernel, span_of, EndoError, Fingerprint, TypeLabel};
use crate::generators::{expected_holonomy_dim, generate, GenError, GenerateOptions, GeneratedGerm};
use crate::geometry::{curvature, GeometryError};
use crate::germ::{CoordKind, MetricGerm};
use crate::holonomy::{commutant, decomposability_probe, fixed_space, is_totally_isotropic, n0_ideal, DecomposabilityProbe};
use crate::structures::{check_relations, lift_structures, structure_manifolds, RelationCheck, StructureFamily, StructureSet};
use crate::tensors::{parallel_tensor_catalog, CatalogEntry};
use crate::verify::{verify, VerificationReport, VerifyInput};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Endo(#[from] EndoError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("pipeline inconsistency: {0}")]
    Inconsistent(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Highest covariant derivative of R used for the holonomy span.
    pub deriv_order: usize,
    /// Random samples per identity check.
    pub samples: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { seed: 0, deriv_order: 2, samples: 8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Classified,
    /// Flat or decomposable: out of classification scope.
    OutOfScope,
    Unclassified,
}

#[derive(Clone, Debug, Serialize)]
pub struct HolonomyReport {
    pub dim: usize,
    /// Span dimension after each derivative level.
    pub level_dims: Vec<usize>,
    /// Derivative level after which nothing new appeared, if the last two
    /// levels added nothing.
    pub stabilized_at: Option<usize>,
    pub deriv_order: usize,
    pub bracket_closed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_generic_dim: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Dims {
    pub e: usize,
    pub n: usize,
    pub s: usize,
    pub e0: usize,
    pub n0: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub config: PipelineConfig,
    pub d: usize,
    pub signature: (usize, usize),
    pub kind: CoordKind,
    pub jet_order: u32,
    pub status: Status,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<TypeLabel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<Fingerprint>,
    pub holonomy: HolonomyReport,
    pub dims: Dims,
    pub e0_isotropic: bool,
    /// Radical as trace-form kernel equals the one-sided trace kernel.
    pub radical_oracle_agrees: bool,
    pub decomposability: DecomposabilityProbe,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structures: Option<StructureSet>,
    pub relations: Vec<RelationCheck>,
    pub structure_families: Vec<StructureFamily>,
    pub catalog: Vec<CatalogEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
}

impl ClassificationReport {
    /// All relation, family, catalog and identity checks passed.
    pub fn checks_pass(&self) -> bool {
        self.relations.iter().all(|r| r.holds)
            && self.structure_families.iter().all(|f| f.consistent())
            && self.catalog.iter().all(|c| c.ok())
            && self.verification.as_ref().map_or(true, |v| v.all_passed())
            && self.radical_oracle_agrees
    }

    /// 0 classified and passing, 1 a check failed, 2 passing with skipped
    /// checks, 3 not classified.
    pub fn exit_code(&self) -> i32 {
        if self.status != Status::Classified {
            3
        } else if !self.checks_pass() {
            1
        } else if self.verification.as_ref().is_some_and(|v| v.any_skipped()) {
            2
        } else {
            0
        }
    }
}

fn ricci_flat_type(label: TypeLabel) -> bool {
    matches!(label, TypeLabel::Three | TypeLabel::ThreePrime | TypeLabel::ThreeC)
}

/// Holonomy, commutant, radical, classification, structures, catalog and
/// identity checks for one germ.
pub fn classify_germ(germ: &MetricGerm, cfg: &PipelineConfig) -> Result<ClassificationReport, PipelineError> {
    let d = germ.d;
    let g0 = germ.g0();
    let deriv = cfg.deriv_order.min((germ.order() as usize).saturating_sub(2));
    let curv = curvature(germ, deriv)?;
    let h = holonomy_span_report(&curv, deriv);
    let (hspan, mut holonomy) = h;
    let e = commutant(&hspan, &g0);
    let e0 = fixed_space(&hspan);
    let e0_isotropic = is_totally_isotropic(&e0, &g0);
    let probe = decomposability_probe(&e, cfg.seed, cfg.samples);
    let mut report = ClassificationReport {
        config: cfg.clone(),
        d,
        signature: germ.signature,
        kind: germ.kind,
        jet_order: germ.order(),
        status: Status::OutOfScope,
        message: String::new(),
        label: None,
        fingerprint: None,
        holonomy: holonomy.clone(),
        dims: Dims { e: e.dim(), n: 0, s: 0, e0: e0.len(), n0: 0 },
        e0_isotropic,
        radical_oracle_agrees: true,
        decomposability: probe.clone(),
        structures: None,
        relations: vec![],
        structure_families: vec![],
        catalog: vec![],
        verification: None,
    };
    if hspan.is_empty() {
        report.message = "flat/decomposable — out of classification scope (holonomy span is zero)".into();
        return Ok(report);
    }
    let n0 = n0_ideal(&e, &e0).map_err(|_| PipelineError::Inconsistent("𝔫₀² ≠ 0".into()))?;
    let analysis = analyze(&e)?;
    let oracle = one_sided_trace_kernel(&e);
    report.radical_oracle_agrees = oracle.len() == analysis.radical.len() && {
        let s = span_of(d, &analysis.radical);
        oracle.iter().all(|m| s.contains(m.as_slice()))
    };
    report.dims = Dims { e: analysis.dim_e, n: analysis.dim_n, s: analysis.dim_s, e0: e0.len(), n0: n0.len() };
    report.fingerprint = Some(analysis.fingerprint);
    if !e0_isotropic || probe.decomposable() {
        report.message = if !e0_isotropic {
            "flat/decomposable — out of classification scope (E₀ is not totally isotropic)".into()
        } else {
            "flat/decomposable — out of classification scope (reducible parallel self-adjoint endomorphism)".into()
        };
        return Ok(report);
    }
    let Some(label) = analysis.label else {
        report.status = Status::Unclassified;
        report.message = format!(
            "unclassified: fingerprint {} is not in the table; input is not an indecomposable holonomy commutant",
            analysis.fingerprint
        );
        return Ok(report);
    };
    if label == TypeLabel::HplusH {
        return Err(PipelineError::Inconsistent("a germ produced the ℍ⊕ℍ commutant".into()));
    }
    holonomy.expected_generic_dim = expected_holonomy_dim(label, d);
    report.holonomy = holonomy;
    let s = lift_structures(&e, &analysis.radical, label)?;
    report.relations = check_relations(label, &s, &g0);
    report.structure_families = structure_manifolds(label, &s, &g0);
    report.catalog = parallel_tensor_catalog(&e, &analysis.radical, &s, label)?;
    let input = VerifyInput {
        germ,
        curv: &curv,
        e: &e,
        e0: &e0,
        radical: &analysis.radical,
        structures: &s,
        expect_ricci_flat: ricci_flat_type(label),
    };
    report.verification = Some(verify(&input, cfg.seed, cfg.samples)?);
    report.structures = Some(s);
    report.status = Status::Classified;
    report.label = Some(label);
    report.message = format!("type {label}");
    Ok(report)
}

fn holonomy_span_report(
    curv: &crate::geometry::CurvatureAtOrigin<crate::Q>,
    deriv: usize,
) -> (crate::holonomy::MatrixSpan, HolonomyReport) {
    let h = crate::holonomy::holonomy_span(curv);
    let r = HolonomyReport {
        dim: h.dim(),
        level_dims: h.level_dims.clone(),
        stabilized_at: h.stabilized_at,
        deriv_order: deriv,
        bracket_closed: h.is_bracket_closed(),
        expected_generic_dim: None,
    };
    (h, r)
}

/// One seed tried by [`generate_classified`].
#[derive(Clone, Debug, Serialize)]
pub struct Attempt {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<TypeLabel>,
    pub holonomy_dim: usize,
    pub accepted: bool,
}

/// Generates a germ of the requested type and runs the pipeline on it,
/// retrying over consecutive seeds until the germ classifies to `label`
/// with the generic holonomy dimension. Every seed tried is logged.
pub fn generate_classified(
    label: TypeLabel,
    opts: &GenerateOptions,
    cfg: &PipelineConfig,
    attempts: usize,
) -> Result<(GeneratedGerm, ClassificationReport, Vec<Attempt>), PipelineError> {
    let mut log = Vec::new();
    for i in 0..attempts.max(1) as u64 {
        let o = GenerateOptions { seed: opts.seed + i, ..opts.clone() };
        let gen = generate(label, &o)?;
        let rep = classify_germ(&gen.germ, &PipelineConfig { seed: o.seed, ..cfg.clone() })?;
        let expected = expected_holonomy_dim(label, gen.germ.d);
        let ok = rep.label == Some(label) && expected.map_or(true, |x| x == rep.holonomy.dim);
        log.push(Attempt { seed: o.seed, label: rep.label, holonomy_dim: rep.holonomy.dim, accepted: ok });
        if ok {
            return Ok((gen, rep, log));
        }
    }
    let tried: Vec<String> = log.iter().map(|a| format!("{}→{:?}/{}", a.seed, a.label, a.holonomy_dim)).collect();
    Err(PipelineError::Inconsistent(format!(
        "no generic germ of type {label} after {} seeds: {}",
        log.len(),
        tried.join(", ")
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germ::flat_germ;

    #[test]
    fn flat_germ_is_out_of_scope() {
        let r = classify_germ(&flat_germ(2, 1, 4), &PipelineConfig::default()).unwrap();
        assert_eq!(r.status, Status::OutOfScope);
        assert_eq!(r.exit_code(), 3);
        assert!(r.message.starts_with("flat/decomposable"));
    }

    #[test]
    fn kaehler_surface_report() {
        let (_, r, log) =
            generate_classified(TypeLabel::Two, &GenerateOptions::default(), &PipelineConfig::default(), 3).unwrap();
        assert_eq!(r.label, Some(TypeLabel::Two));
        assert_eq!(r.holonomy.dim, 4);
        assert!(r.checks_pass());
        assert!(log.last().unwrap().accepted);
        assert_eq!((r.dims.e, r.dims.n, r.dims.s), (2, 0, 2));
    }

    #[test]
    fn reports_are_deterministic() {
        let run = || {
            let (_, r, _) =
                generate_classified(TypeLabel::ThreePrime, &GenerateOptions::default(), &PipelineConfig::default(), 3)
                    .unwrap();
            serde_json::to_string(&r).unwrap()
        };
        assert_eq!(run(), run());
    }
}
