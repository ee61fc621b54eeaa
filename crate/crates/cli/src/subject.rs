use std::path::PathBuf;

use dpsr_core::grouptesting::{parse_rational, DesignKind};
use dpsr_core::mechanisms::{clamp_to_accuracy, resize_to_d};
use dpsr_core::{
    GroupTestingPipeline, Mechanism, MechanismKind, NoiseSpec, PoolingDesign, Subset,
    SubsetMechanism, UModel,
};
use num_rational::BigRational;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::args::{DesignChoice, MechChoice, NoiseChoice, SubjectArgs, TransformChoice};
use crate::config::Layer;
use crate::error::{usage, CliError, CliResult};

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
enum Target {
    Mech {
        kind: MechanismKind,
        transform: Option<TransformChoice>,
    },
    Gt {
        design: DesignSource,
        noise: NoiseChoice,
        u: Option<(BigRational, BigRational, BigRational)>,
    },
}

#[derive(Clone, Debug)]
enum DesignSource {
    Identity,
    Bernoulli { tests: usize, p: f64 },
    File(PoolingDesign),
}

/// Everything about the subject except `(n, d, beta)`.
#[derive(Clone, Debug)]
pub struct SubjectPlan {
    target: Target,
}

impl SubjectPlan {
    pub fn resolve(layer: &mut Layer, a: &SubjectArgs) -> CliResult<Self> {
        // a flag picking one kind of subject silences the config's other kind
        let flagged = a.mech.is_some() || a.gt.is_some();
        let mech: Option<MechChoice> = layer.get("mech", a.mech)?;
        let gt: Option<DesignChoice> = layer.get("gt", a.gt)?;
        let (mech, gt) = if flagged { (a.mech, a.gt) } else { (mech, gt) };
        let transform: Option<TransformChoice> = layer.get("transform", a.transform)?;
        let design_file: Option<PathBuf> = layer.get("design-file", a.design_file.clone())?;
        let tests: Option<usize> = layer.get("tests", a.tests)?;
        let p: Option<f64> = layer.get("p", a.p)?;
        let noise: Option<NoiseChoice> = layer.get("noise", a.noise)?;
        let q0: Option<String> = layer.get("q0", a.q0.clone())?;
        let q1: Option<String> = layer.get("q1", a.q1.clone())?;
        let q2: Option<String> = layer.get("q2", a.q2.clone())?;

        let target = match (mech, gt) {
            (Some(_), Some(_)) => return Err(usage("give either --mech or --gt, not both")),
            (None, None) => return Err(usage("missing --mech or --gt")),
            (Some(m), None) => {
                if noise.is_some() || design_file.is_some() {
                    return Err(usage("--noise and --design-file apply to --gt only"));
                }
                Target::Mech {
                    kind: match m {
                        MechChoice::A1sphere => MechanismKind::A1Sphere,
                        MechChoice::A1ball => MechanismKind::A1Ball,
                        MechChoice::A2 => MechanismKind::A2,
                        MechChoice::Identity => MechanismKind::Identity,
                        MechChoice::Uniform => MechanismKind::UniformOverE,
                    },
                    transform,
                }
            }
            (None, Some(g)) => {
                if transform.is_some() {
                    return Err(usage("--transform applies to --mech only"));
                }
                let design = match g {
                    DesignChoice::Identity => DesignSource::Identity,
                    DesignChoice::Bernoulli => DesignSource::Bernoulli {
                        tests: tests.ok_or_else(|| usage("--gt bernoulli needs --tests"))?,
                        p: p.ok_or_else(|| usage("--gt bernoulli needs --p"))?,
                    },
                    DesignChoice::File => {
                        let path =
                            design_file.ok_or_else(|| usage("--gt file needs --design-file"))?;
                        let text = std::fs::read_to_string(&path)
                            .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
                        let design: PoolingDesign = serde_json::from_str(&text)
                            .map_err(|e| usage(format!("{}: {e}", path.display())))?;
                        DesignSource::File(design)
                    }
                };
                let noise = noise.unwrap_or(NoiseChoice::None);
                let u = if noise == NoiseChoice::AfterIid {
                    let read = |s: Option<String>, flag: &str| -> CliResult<Option<BigRational>> {
                        s.map(|s| {
                            parse_rational(&s)
                                .map_err(|_| usage(format!("--{flag}: cannot read {s:?}")))
                        })
                        .transpose()
                    };
                    let q0 = read(q0, "q0")?.ok_or_else(|| usage("after-iid noise needs --q0"))?;
                    let q1 = read(q1, "q1")?.ok_or_else(|| usage("after-iid noise needs --q1"))?;
                    let q2 = read(q2, "q2")?.unwrap_or_else(|| BigRational::one() - &q0 - &q1);
                    Some((q0, q1, q2))
                } else {
                    None
                };
                Target::Gt { design, noise, u }
            }
        };
        Ok(SubjectPlan { target })
    }

    /// Ground set size fixed by a design file, if any.
    pub fn fixed_n(&self) -> Option<usize> {
        match &self.target {
            Target::Gt {
                design: DesignSource::File(d),
                ..
            } => Some(d.n()),
            _ => None,
        }
    }

    pub fn is_gt(&self) -> bool {
        matches!(self.target, Target::Gt { .. })
    }

    pub fn needs_seed(&self) -> bool {
        matches!(
            self.target,
            Target::Gt {
                design: DesignSource::Bernoulli { .. },
                ..
            }
        )
    }

    pub fn build(
        &self,
        n: usize,
        d: usize,
        beta: Option<usize>,
        seed: Option<u64>,
    ) -> CliResult<Subject> {
        match &self.target {
            Target::Mech { kind, transform } => {
                let beta = beta.ok_or_else(|| usage("missing --beta"))?;
                let base = Mechanism::new(*kind, n, d, beta)?;
                let m = match transform {
                    None => base,
                    Some(TransformChoice::Clamp) => clamp_to_accuracy(base),
                    Some(TransformChoice::Resize) => resize_to_d(base),
                };
                Ok(Subject {
                    n,
                    d,
                    beta: Some(beta),
                    kind: SubjectKind::Mech(m),
                })
            }
            Target::Gt { design, noise, u } => {
                let design = match design {
                    DesignSource::Identity => PoolingDesign::identity(n)?,
                    DesignSource::Bernoulli { tests, p } => {
                        let seed = seed.ok_or_else(|| {
                            usage("--gt bernoulli draws a random design; --seed is required")
                        })?;
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        dpsr_core::grouptesting::build_design(
                            &DesignKind::Bernoulli {
                                n,
                                tests: *tests,
                                p: *p,
                            },
                            &mut rng,
                        )?
                    }
                    DesignSource::File(design) => {
                        if design.n() != n {
                            return Err(usage(format!(
                                "--n {n} disagrees with the design file (n = {})",
                                design.n()
                            )));
                        }
                        design.clone()
                    }
                };
                if d == 0 || d >= n {
                    return Err(usage(format!("need 0 < d < n, got n={n}, d={d}")));
                }
                let need_beta = || beta.ok_or_else(|| usage("this noise model needs --beta"));
                let noise = match noise {
                    NoiseChoice::None => NoiseSpec::Noiseless,
                    NoiseChoice::Before => NoiseSpec::Before { beta: need_beta()? },
                    NoiseChoice::AfterInduced => {
                        NoiseSpec::After(UModel::InducedFromB { beta: need_beta()? })
                    }
                    NoiseChoice::AfterIid => {
                        let (q0, q1, q2) = u.clone().expect("resolved with the noise choice");
                        NoiseSpec::After(UModel::independent(q0, q1, q2)?)
                    }
                };
                if let NoiseSpec::Before { beta }
                | NoiseSpec::After(UModel::InducedFromB { beta }) = noise
                {
                    if beta > n {
                        return Err(usage(format!("noise size beta={beta} exceeds n={n}")));
                    }
                }
                Ok(Subject {
                    n,
                    d,
                    beta,
                    kind: SubjectKind::Gt(GroupTestingPipeline { design, noise, d }),
                })
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum SubjectKind {
    Mech(Mechanism),
    Gt(GroupTestingPipeline),
}

#[derive(Clone, Debug)]
pub struct Subject {
    pub n: usize,
    pub d: usize,
    pub beta: Option<usize>,
    pub kind: SubjectKind,
}

impl Subject {
    /// The subject as a map from secret sets to output sets. For pooled
    /// tests the outputs are decoded sets.
    pub fn as_mechanism(&self) -> &dyn SubsetMechanism {
        match &self.kind {
            SubjectKind::Mech(m) => m,
            SubjectKind::Gt(p) => p,
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            SubjectKind::Mech(m) => mech_label(m),
            SubjectKind::Gt(p) => {
                let design = if p.design.is_identity() {
                    "identity"
                } else {
                    "pooled"
                };
                format!("gt-{design}/{}", p.noise.name())
            }
        }
    }

    pub fn describe(&self) -> Value {
        match &self.kind {
            SubjectKind::Mech(m) => json!({ "label": self.label(), "mechanism": m }),
            SubjectKind::Gt(p) => json!({
                "label": self.label(),
                "design": p.design,
                "noise": p.noise,
                "d": p.d,
            }),
        }
    }

    /// `--input` parsed against this subject, or `{0..d-1}`.
    pub fn input(&self, text: Option<&str>) -> CliResult<Subset> {
        let Some(text) = text else {
            return Ok(Subset::prefix(self.n, self.d)?);
        };
        let mut items = Vec::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            items.push(
                part.parse::<usize>()
                    .map_err(|_| usage(format!("--input: bad index {part:?}")))?,
            );
        }
        let e = Subset::new(self.n, items)?;
        if e.len() != self.d {
            return Err(usage(format!(
                "--input has {} distinct items, expected d = {}",
                e.len(),
                self.d
            )));
        }
        Ok(e)
    }
}

fn mech_label(m: &Mechanism) -> String {
    match m.inner() {
        Some(inner) => format!("{}({})", m.kind(), mech_label(inner)),
        None => m.kind().to_string(),
    }
}
