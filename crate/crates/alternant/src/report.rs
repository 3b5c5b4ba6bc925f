//! JSON report types. Field order is fixed by the struct layout, so equal runs
//! serialize to equal bytes.

use alternant_core::spline_free::{
    Barrier, CountingCheck, DescentReport, KnotClassification, MoveAttempt, WMinimalityReport,
};
use alternant_core::{AlternatingSequence, CsCertificate, FitReport, Polynomial, Spline, SplineFitReport, Verdict};
use serde::{Deserialize, Serialize};

use crate::cli::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternationDto {
    pub beta: f64,
    pub eps: i8,
    pub big_m: f64,
    pub pairs: Vec<[f64; 2]>,
}

impl From<&AlternatingSequence> for AlternationDto {
    fn from(s: &AlternatingSequence) -> Self {
        AlternationDto {
            beta: s.beta,
            eps: s.eps.value() as i8,
            big_m: s.big_m,
            pairs: s.pairs.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceDto {
    pub interval: [f64; 2],
    /// Chebyshev coefficients on `interval`.
    pub chebyshev: Vec<f64>,
    /// Monomial coefficients in `t`, lowest degree first.
    pub monomial: Vec<f64>,
}

impl From<&Polynomial> for PieceDto {
    fn from(p: &Polynomial) -> Self {
        PieceDto {
            interval: [p.domain().lo(), p.domain().hi()],
            chebyshev: p.coefficients().to_vec(),
            monomial: p.to_monomial(),
        }
    }
}

fn pieces(s: &Spline) -> Vec<PieceDto> {
    s.pieces().iter().map(PieceDto::from).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleDto {
    pub value: f64,
    pub grid_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDto {
    pub beta: f64,
    pub k: usize,
    pub norm_before: f64,
    pub norm_after: f64,
    pub lambda: f64,
    pub rate_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyFitDto {
    pub config: RunConfig,
    pub status: String,
    pub final_norm: f64,
    pub iterations: usize,
    pub beta_history: Vec<f64>,
    pub polynomial: PieceDto,
    pub alternation: Option<AlternationDto>,
    pub steps: Vec<StepDto>,
    pub oracle: Option<OracleDto>,
}

impl PolyFitDto {
    pub fn new(config: RunConfig, r: &FitReport, oracle: Option<OracleDto>) -> Self {
        PolyFitDto {
            config,
            status: r.status.as_str().into(),
            final_norm: r.final_norm,
            iterations: r.iterations,
            beta_history: r.beta_history.clone(),
            polynomial: PieceDto::from(&r.polynomial),
            alternation: r.alternation.as_ref().map(AlternationDto::from),
            steps: r
                .steps
                .iter()
                .map(|s| StepDto {
                    beta: s.beta,
                    k: s.k,
                    norm_before: s.norm_before,
                    norm_after: s.norm_after,
                    lambda: s.lambda,
                    rate_bound: Some(s.rate_bound),
                })
                .collect(),
            oracle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateDto {
    pub i1: usize,
    pub i2: usize,
    pub count: usize,
    pub required: usize,
}

impl From<&CsCertificate> for CertificateDto {
    fn from(c: &CsCertificate) -> Self {
        CertificateDto { i1: c.i1, i2: c.i2, count: c.count, required: c.required }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineFitDto {
    pub config: RunConfig,
    pub status: String,
    pub final_norm: f64,
    pub iterations: usize,
    pub beta_history: Vec<f64>,
    pub knots: Vec<f64>,
    pub degrees: Vec<usize>,
    pub pieces: Vec<PieceDto>,
    pub alternation: Option<AlternationDto>,
    pub certificate: Option<CertificateDto>,
    pub steps: Vec<StepDto>,
    pub oracle: Option<OracleDto>,
}

impl SplineFitDto {
    pub fn new(config: RunConfig, r: &SplineFitReport, oracle: Option<OracleDto>) -> Self {
        let kv = r.spline.knot_vector();
        SplineFitDto {
            config,
            status: r.status.as_str().into(),
            final_norm: r.final_norm,
            iterations: r.iterations,
            beta_history: r.beta_history.clone(),
            knots: kv.knots().to_vec(),
            degrees: kv.degrees().to_vec(),
            pieces: pieces(&r.spline),
            alternation: r.alternation.as_ref().map(AlternationDto::from),
            certificate: r.certificate.as_ref().map(CertificateDto::from),
            steps: r
                .steps
                .iter()
                .map(|s| StepDto {
                    beta: s.beta,
                    k: s.k,
                    norm_before: s.norm_before,
                    norm_after: s.norm_after,
                    lambda: s.lambda,
                    rate_bound: None,
                })
                .collect(),
            oracle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotDto {
    pub index: usize,
    pub x: f64,
    pub extreme: bool,
    pub s: i8,
    pub deviation: f64,
    pub jump: f64,
    pub kind: String,
}

impl From<&KnotClassification> for KnotDto {
    fn from(c: &KnotClassification) -> Self {
        KnotDto {
            index: c.index,
            x: c.x,
            extreme: c.is_extreme,
            s: c.s.value() as i8,
            deviation: c.deviation,
            jump: c.jump,
            kind: c.kind.as_str().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveDto {
    pub knot: usize,
    pub direction: String,
    pub exists: bool,
    pub reason: Option<String>,
    pub witness_degrees: Vec<usize>,
    pub lambda: Option<f64>,
    pub new_knot: Option<f64>,
    pub theta_after: Option<f64>,
    pub improved: bool,
}

impl From<&MoveAttempt> for MoveDto {
    fn from(m: &MoveAttempt) -> Self {
        MoveDto {
            knot: m.knot,
            direction: m.direction.as_str().into(),
            exists: m.exists,
            reason: m.reason.clone(),
            witness_degrees: m.witness_degrees.clone(),
            lambda: m.lambda,
            new_knot: m.new_knot,
            theta_after: m.theta_after,
            improved: m.improved,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingDto {
    pub knot: usize,
    pub direction: String,
    pub family_exists: bool,
    pub counting_blocks: bool,
    pub agree: bool,
}

impl From<&CountingCheck> for CountingDto {
    fn from(c: &CountingCheck) -> Self {
        CountingDto {
            knot: c.knot,
            direction: c.direction.as_str().into(),
            family_exists: c.family_exists,
            counting_blocks: c.counting_blocks,
            agree: c.agree,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierDto {
    pub i_minus: usize,
    pub i0: usize,
    pub i_plus: usize,
    pub j_minus: usize,
    pub j_plus: usize,
    pub samples: usize,
    pub min_theta: Option<f64>,
    pub holds: bool,
}

impl From<&Barrier> for BarrierDto {
    fn from(b: &Barrier) -> Self {
        BarrierDto {
            i_minus: b.i_minus,
            i0: b.i0,
            i_plus: b.i_plus,
            j_minus: b.j_minus,
            j_plus: b.j_plus,
            samples: b.samples,
            min_theta: b.min_theta,
            holds: b.holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictDto {
    pub kind: String,
    pub knot: Option<usize>,
    pub direction: Option<String>,
}

impl From<Verdict> for VerdictDto {
    fn from(v: Verdict) -> Self {
        let (knot, direction) = match v {
            Verdict::ViolatedAt { knot, direction } | Verdict::Inconclusive { knot, direction } => {
                (Some(knot), Some(direction.as_str().to_string()))
            }
            _ => (None, None),
        };
        VerdictDto { kind: v.as_str().into(), knot, direction }
    }
}

/// The move that refutes the condition, replayable from `knots_before`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessDto {
    pub knot: usize,
    pub direction: String,
    pub lambda: f64,
    pub deltas: Vec<PieceDto>,
    pub knots_before: Vec<f64>,
    pub knots_after: Vec<f64>,
    pub tau_norm: f64,
    pub theta_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckDto {
    pub theta: f64,
    pub knots: Vec<KnotDto>,
    pub pieces: Vec<PieceDto>,
    pub alternation: Option<AlternationDto>,
    pub moves: Vec<MoveDto>,
    pub counting: Vec<CountingDto>,
    pub formulations_agree: bool,
    pub barrier: Option<BarrierDto>,
    pub verdict: VerdictDto,
    pub witness: Option<WitnessDto>,
}

impl From<&WMinimalityReport> for CheckDto {
    fn from(r: &WMinimalityReport) -> Self {
        let witness = r.applied.as_ref().map(|a| WitnessDto {
            knot: a.mv.knot,
            direction: a.mv.direction.as_str().into(),
            lambda: a.mv.lambda,
            deltas: a.family.deltas.iter().map(PieceDto::from).collect(),
            knots_before: r.sigma.knot_vector().knots().to_vec(),
            knots_after: a.mv.config.knot_vector().knots().to_vec(),
            tau_norm: a.mv.tau_norm,
            theta_after: a.theta_after,
        });
        CheckDto {
            theta: r.theta,
            knots: r.classifications.iter().map(KnotDto::from).collect(),
            pieces: pieces(&r.sigma),
            alternation: r.alternation.as_ref().map(AlternationDto::from),
            moves: r.moves.iter().map(MoveDto::from).collect(),
            counting: r.counting.iter().map(CountingDto::from).collect(),
            formulations_agree: r.formulations_agree,
            barrier: r.barrier.as_ref().map(BarrierDto::from),
            verdict: r.verdict.into(),
            witness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeCheckDto {
    pub config: RunConfig,
    #[serde(flatten)]
    pub check: CheckDto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentDto {
    pub config: RunConfig,
    pub trajectory: Vec<f64>,
    pub knots: Vec<Vec<f64>>,
    pub moves: usize,
    pub final_check: CheckDto,
}

impl DescentDto {
    pub fn new(config: RunConfig, d: &DescentReport) -> Self {
        DescentDto {
            config,
            trajectory: d.trajectory.clone(),
            knots: d.knots.clone(),
            moves: d.moves,
            final_check: CheckDto::from(&d.final_report),
        }
    }
}
