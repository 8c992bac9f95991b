//! Machine-checked versions of the type tables: relations on normal forms,
//! equivalence of alternative gauges, the parallel-tensor catalog on normal
//! forms, and holonomy dimensions against the holonomy groups of the types.

use serde::Serialize;

use crate::endo::{analyze, TypeLabel};
use crate::generators::{default_dimension, GenerateOptions};
use crate::holonomy::MatrixAlgebraWithInvolution;
use crate::matrix::{combine, Matrix, QMat, Span};
use crate::pipeline::{generate_classified, PipelineConfig, PipelineError};
use crate::scalar::{Field, Q};
use crate::structures::{admissible_signature, check_relations, normal_form, StructureSet};
use crate::tensors::{parallel_tensor_catalog, FormKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Table {
    /// Generator relations and quotient fingerprints.
    Relations,
    /// Normal forms: signatures and alternative gauges.
    NormalForms,
    /// Parallel tensors.
    Tensors,
    /// Holonomy groups of the types.
    TypesRow,
}

impl Table {
    pub fn parse(s: &str) -> Option<Table> {
        match s {
            "1" => Some(Table::Relations),
            "2" => Some(Table::NormalForms),
            "3" => Some(Table::Tensors),
            "types_row" | "types-row" => Some(Table::TypesRow),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TableCheck {
    pub label: TypeLabel,
    pub signature: (usize, usize),
    pub item: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableReport {
    pub table: Table,
    pub checks: Vec<TableCheck>,
}

impl TableReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TableCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

/// Small admissible signatures per type: the minimal one and one more.
pub fn sample_signatures(label: TypeLabel) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for d in 1..=8 {
        for p in (0..=d).rev() {
            if admissible_signature(label, p, d - p) {
                out.push((p, d - p));
            }
        }
        if out.len() >= 3 {
            break;
        }
    }
    out
}

/// Smallest algebra containing `Id` and `gens`.
pub fn generated_algebra(g0: &QMat, gens: &[QMat]) -> MatrixAlgebraWithInvolution {
    let d = g0.rows;
    let mut span = Span::<Q>::new(d * d);
    let mut basis: Vec<QMat> = Vec::new();
    let mut push = |m: QMat, basis: &mut Vec<QMat>| {
        if span.insert(m.as_slice()) {
            basis.push(m);
        }
    };
    push(Matrix::identity(d), &mut basis);
    for g in gens {
        push(g.clone(), &mut basis);
    }
    let mut i = 0;
    while i < basis.len() {
        for j in 0..=i {
            let (a, b) = (basis[i].clone(), basis[j].clone());
            push(a.mul(&b), &mut basis);
            push(b.mul(&a), &mut basis);
        }
        i += 1;
    }
    MatrixAlgebraWithInvolution::new(g0, &basis)
}

fn structures_of(s: &StructureSet) -> Vec<QMat> {
    s.named().into_iter().map(|(_, m, _)| m.clone()).collect()
}

/// Relations of every type on its normal forms, and the fingerprint of the
/// algebra the structures generate.
pub fn table_relations() -> TableReport {
    let mut checks = Vec::new();
    for label in TypeLabel::HOLONOMY {
        for (p, q) in sample_signatures(label) {
            for alternative in [false, true] {
                let Some((g, s)) = normal_form(label, p, q, alternative) else { continue };
                if alternative && normal_form(label, p, q, false).map(|x| x.0) == Some(g.clone()) {
                    continue;
                }
                let tag = if alternative { " (alternative)" } else { "" };
                for r in check_relations(label, &s, &g) {
                    checks.push(TableCheck {
                        label,
                        signature: (p, q),
                        item: format!("{}{tag}", r.relation),
                        holds: r.holds,
                        witness: None,
                    });
                }
                let e = generated_algebra(&g, &structures_of(&s));
                let got = analyze(&e).map(|a| a.fingerprint);
                let want = label.fingerprint();
                checks.push(TableCheck {
                    label,
                    signature: (p, q),
                    item: format!("fingerprint of ⟨structures⟩ = {want}{tag}"),
                    holds: got.as_ref().ok() == Some(&want),
                    witness: Some(match got {
                        Ok(f) => f.to_string(),
                        Err(e) => e.to_string(),
                    }),
                });
            }
        }
    }
    TableReport { table: Table::Relations, checks }
}

/// Searches `P` with `Pᵀ g P = g'` and `S P = P S'` for paired structures,
/// over small rational combinations of the intertwiner space.
pub fn find_basis_change(g: &QMat, s: &[QMat], g2: &QMat, s2: &[QMat]) -> Option<QMat> {
    let d = g.rows;
    // rows of the linear system S P − P S' = 0 in the entries of P
    let mut rows: Vec<Vec<Q>> = Vec::new();
    for (a, b) in s.iter().zip(s2) {
        for i in 0..d {
            for j in 0..d {
                let mut row = vec![Q::zero(); d * d];
                for k in 0..d {
                    row[k * d + j] += &a[(i, k)];
                    row[i * d + k] -= &b[(k, j)];
                }
                rows.push(row);
            }
        }
    }
    let basis: Vec<QMat> = if rows.is_empty() {
        (0..d * d).map(|t| Matrix::from_fn(d, d, |i, j| if i * d + j == t { Q::one() } else { Q::zero() })).collect()
    } else {
        Matrix::from_rows(rows).nullspace().into_iter().map(|v| Matrix::unflatten(d, &v)).collect()
    };
    let m = basis.len();
    let values = [Q::zero(), Q::one(), Q::int(-1), Q::new(1, 2), Q::new(-1, 2)];
    let total = values.len().checked_pow(m as u32)?;
    if total > 400_000 {
        return None;
    }
    for mut t in 0..total {
        let c: Vec<Q> = (0..m)
            .map(|_| {
                let v = values[t % values.len()].clone();
                t /= values.len();
                v
            })
            .collect();
        let p = combine(&c, &basis);
        if p.transpose().mul(g).mul(&p) == *g2 && !p.det().is_zero() {
            return Some(p);
        }
    }
    None
}

/// `A ⊗ I_m` with `m × m` blocks.
fn kron_identity(a: &QMat, m: usize) -> QMat {
    Matrix::from_fn(a.rows * m, a.cols * m, |i, j| if i % m == j % m { a[(i / m, j / m)].clone() } else { Q::zero() })
}

/// Basis change from the standard to the alternative normal form. The
/// forms are `(minimal form) ⊗ I_m`, so the change is searched at the
/// smallest admissible size, lifted, and verified at full size.
pub fn gauge_change(label: TypeLabel, p: usize, q: usize) -> Option<QMat> {
    let (g, s) = normal_form(label, p, q, false)?;
    let (g2, s2) = normal_form(label, p, q, true)?;
    let (a, b) = (structures_of(&s), structures_of(&s2));
    let verify = |x: &QMat| {
        x.transpose().mul(&g).mul(x) == g2 && a.iter().zip(&b).all(|(u, v)| u.mul(x) == x.mul(v)) && !x.det().is_zero()
    };
    for m in (1..=p.max(q)).rev() {
        if p % m != 0 || q % m != 0 || m == 1 && p + q > 4 {
            continue;
        }
        let Some((g0, s0)) = normal_form(label, p / m, q / m, false) else { continue };
        let Some((g1, s1)) = normal_form(label, p / m, q / m, true) else { continue };
        if let Some(x) = find_basis_change(&g0, &structures_of(&s0), &g1, &structures_of(&s1)) {
            let lifted = kron_identity(&x, m);
            if verify(&lifted) {
                return Some(lifted);
            }
        }
    }
    None
}

/// Normal forms have the declared signature; alternative gauges are
/// equivalent to the standard ones by an explicit basis change.
pub fn table_normal_forms() -> TableReport {
    let mut checks = Vec::new();
    for label in TypeLabel::HOLONOMY {
        for (p, q) in sample_signatures(label) {
            let Some((g, _)) = normal_form(label, p, q, false) else { continue };
            let (sp, sq, z) = g.signature();
            checks.push(TableCheck {
                label,
                signature: (p, q),
                item: "Mat(g) has signature (p, q)".into(),
                holds: (sp, sq, z) == (p, q, 0),
                witness: Some(format!("({sp},{sq},{z})")),
            });
            let Some((g2, _)) = normal_form(label, p, q, true) else { continue };
            if g2 == g {
                continue;
            }
            let found = gauge_change(label, p, q);
            checks.push(TableCheck {
                label,
                signature: (p, q),
                item: "alternative gauge equivalent by a basis change".into(),
                holds: found.is_some(),
                witness: found.map(|p| format!("P = {p:?}")),
            });
        }
    }
    TableReport { table: Table::NormalForms, checks }
}

/// Every applicable catalog row instantiates on the normal forms.
pub fn table_tensors() -> TableReport {
    let mut checks = Vec::new();
    for label in TypeLabel::HOLONOMY {
        for (p, q) in sample_signatures(label) {
            let Some((g, s)) = normal_form(label, p, q, false) else { continue };
            let e = generated_algebra(&g, &structures_of(&s));
            match parallel_tensor_catalog(&e, &[], &s, label) {
                Ok(cat) => {
                    for kind in FormKind::ALL.iter().filter(|k| k.applies_to(label)) {
                        let rows: Vec<_> = cat.iter().filter(|c| c.kind == *kind).collect();
                        let bad = rows.iter().find(|c| !c.ok());
                        checks.push(TableCheck {
                            label,
                            signature: (p, q),
                            item: format!("{kind:?}"),
                            holds: !rows.is_empty() && bad.is_none(),
                            witness: Some(match bad {
                                Some(c) => format!("{} fails symmetry/nondegeneracy", c.construction),
                                None => format!("{} form(s): {}", rows.len(), rows.first().map_or("", |c| &c.construction)),
                            }),
                        });
                    }
                }
                Err(err) => checks.push(TableCheck {
                    label,
                    signature: (p, q),
                    item: "catalog".into(),
                    holds: false,
                    witness: Some(err.to_string()),
                }),
            }
        }
    }
    TableReport { table: Table::Tensors, checks }
}

/// Holonomy group of a generic germ of each type and its real dimension.
pub fn holonomy_group(label: TypeLabel, d: usize) -> (String, usize) {
    let dim_so = |n: usize| n * (n.max(1) - 1) / 2;
    let dim_sp = |n: usize| n * (2 * n + 1);
    match label {
        TypeLabel::One => ("SO⁰(p,q)".into(), dim_so(d)),
        TypeLabel::OneC => (format!("SO({},ℂ)", d / 2), 2 * dim_so(d / 2)),
        TypeLabel::Two => ("U(p,q)".into(), (d / 2) * (d / 2)),
        TypeLabel::TwoPrime => (format!("GL({},ℝ)", d / 2), (d / 2) * (d / 2)),
        TypeLabel::TwoC => (format!("GL({},ℂ)", d / 4), 2 * (d / 4) * (d / 4)),
        TypeLabel::Three => ("Sp(p,q)".into(), dim_sp(d / 4)),
        TypeLabel::ThreePrime => (format!("Sp({},ℝ)", d / 2), dim_sp(d / 4)),
        TypeLabel::ThreeC => (format!("Sp({},ℂ)", d / 4), 2 * dim_sp(d / 8)),
        TypeLabel::HplusH => ("-".into(), 0),
    }
}

/// Generated germs of each type reach the dimension of the type's holonomy
/// group.
pub fn table_types_row(seed: u64, attempts: usize) -> Result<TableReport, PipelineError> {
    let mut checks = Vec::new();
    for label in TypeLabel::HOLONOMY {
        let d = default_dimension(label);
        let (group, dim) = holonomy_group(label, d);
        let opts = GenerateOptions { seed, ..Default::default() };
        let (gen, rep, log) = generate_classified(label, &opts, &PipelineConfig { seed, ..Default::default() }, attempts)?;
        checks.push(TableCheck {
            label,
            signature: gen.germ.signature,
            item: format!("dim 𝔥 = dim {group} = {dim}"),
            holds: rep.holonomy.dim == dim,
            witness: Some(format!("dim 𝔥 = {}, seeds tried {:?}", rep.holonomy.dim, log.iter().map(|a| a.seed).collect::<Vec<_>>())),
        });
    }
    Ok(TableReport { table: Table::TypesRow, checks })
}

pub fn run_table(table: Table, seed: u64) -> Result<TableReport, PipelineError> {
    Ok(match table {
        Table::Relations => table_relations(),
        Table::NormalForms => table_normal_forms(),
        Table::Tensors => table_tensors(),
        Table::TypesRow => table_types_row(seed, 5)?,
    })
}
