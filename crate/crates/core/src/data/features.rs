use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::manifest::ImageRecord;
use super::synthetic::ACTIVATION_OFFSET;
use crate::hoi::{Part, PairCandidate, NUM_PARTS};
use crate::math::sqrt;
use crate::net::FeatureBundle;
use crate::raster::MapStack;
use crate::{Error, Result};

/// Where part features come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeatureMode {
    /// Derived from the human vector by fixed per-part projections.
    #[default]
    Synthetic,
    /// Read from the manifest's explicit part features.
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureProviderSpec {
    pub mode: FeatureMode,
    pub feature_dim: usize,
    pub part_dim: usize,
    pub seed: u64,
}

impl Default for FeatureProviderSpec {
    fn default() -> Self {
        Self {
            mode: FeatureMode::Synthetic,
            feature_dim: 32,
            part_dim: 8,
            seed: 0,
        }
    }
}

/// Turns manifest records into per-pair network inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureProvider {
    pub spec: FeatureProviderSpec,
    /// `part_dim - 1` rows of `feature_dim` per part.
    projections: Vec<Vec<f64>>,
}

impl FeatureProvider {
    pub fn new(spec: FeatureProviderSpec) -> Result<Self> {
        if spec.feature_dim == 0 || spec.part_dim == 0 {
            return Err(Error::Config(format!("feature dims must be at least 1: {spec:?}")));
        }
        if spec.mode == FeatureMode::Synthetic && spec.feature_dim < ACTIVATION_OFFSET + 6 {
            return Err(Error::Config(format!("synthetic features need at least 6 dims: {spec:?}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let scale = 1.0 / sqrt(spec.feature_dim as f64);
        let rows = (spec.part_dim - 1) * spec.feature_dim;
        let projections = (0..NUM_PARTS)
            .map(|_| {
                (0..rows)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        z * scale
                    })
                    .collect()
            })
            .collect();
        Ok(Self { spec, projections })
    }

    fn instance<'a>(&self, image: &'a ImageRecord, det: usize) -> Result<&'a Vec<f64>> {
        let f = image.features.get(&det).ok_or(Error::MissingFeatures {
            image_id: image.image_id,
            detection: det,
        })?;
        if f.len() != self.spec.feature_dim {
            return Err(Error::LengthMismatch {
                op: "instance features",
                expected: self.spec.feature_dim,
                got: f.len(),
            });
        }
        Ok(f)
    }

    fn synthetic_part(&self, part: Part, f_h: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.spec.part_dim);
        out.push(f_h[ACTIVATION_OFFSET + part.group().index()]);
        for row in self.projections[part.index()].chunks_exact(self.spec.feature_dim) {
            out.push(crate::math::dot(row, f_h));
        }
        out
    }

    /// Network inputs for one edge of `image`.
    pub fn bundle(&self, image: &ImageRecord, pair: &PairCandidate) -> Result<FeatureBundle> {
        let human = self.instance(image, pair.human_idx)?.clone();
        let object = self.instance(image, pair.object_idx)?.clone();
        let explicit = match self.spec.mode {
            FeatureMode::File => Some(image.part_features.get(&pair.human_idx).ok_or(Error::MissingFeatures {
                image_id: image.image_id,
                detection: pair.human_idx,
            })?),
            FeatureMode::Synthetic => None,
        };
        let mut parts: [Vec<f64>; NUM_PARTS] = core::array::from_fn(|_| vec![0.0; self.spec.part_dim]);
        for (i, pb) in pair.part_boxes.iter().enumerate() {
            if !pb.valid {
                continue;
            }
            parts[i] = match explicit {
                Some(p) => {
                    if p[i].len() != self.spec.part_dim {
                        return Err(Error::LengthMismatch {
                            op: "part features",
                            expected: self.spec.part_dim,
                            got: p[i].len(),
                        });
                    }
                    p[i].clone()
                }
                None => self.synthetic_part(pb.part, &human),
            };
        }
        Ok(FeatureBundle {
            human,
            object,
            parts,
            maps: MapStack::for_pair(pair),
        })
    }

    /// Bundles for every edge, in edge order.
    pub fn provide(&self, image: &ImageRecord, pairs: &[PairCandidate]) -> Result<Vec<FeatureBundle>> {
        pairs.iter().map(|p| self.bundle(image, p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synthetic_generate, SyntheticSpec};
    use crate::hoi::PairingThresholds;

    fn data() -> crate::data::DatasetManifest {
        let spec = SyntheticSpec {
            images: 5,
            ..SyntheticSpec::default()
        };
        synthetic_generate(&spec, 2).unwrap().0
    }

    #[test]
    fn synthetic_dims_and_invalid_parts() {
        let m = data();
        let p = FeatureProvider::new(FeatureProviderSpec::default()).unwrap();
        let mut saw_invalid = false;
        for img in &m.images {
            let pairs = img.labelled_pairs(&m.categories, PairingThresholds::default(), 0.6, 0.5);
            for (pair, b) in pairs.iter().zip(p.provide(img, &pairs).unwrap()) {
                assert_eq!(b.human.len(), 32);
                assert_eq!(b.object.len(), 32);
                for (pb, fp) in pair.part_boxes.iter().zip(&b.parts) {
                    assert_eq!(fp.len(), 8);
                    if !pb.valid {
                        saw_invalid = true;
                        assert!(fp.iter().all(|&v| v == 0.0));
                    } else {
                        assert_eq!(fp[0], b.human[pb.part.group().index()]);
                    }
                }
            }
        }
        assert!(saw_invalid);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = FeatureProvider::new(FeatureProviderSpec::default()).unwrap();
        let b = FeatureProvider::new(FeatureProviderSpec::default()).unwrap();
        assert_eq!(a, b);
        let c = FeatureProvider::new(FeatureProviderSpec {
            seed: 1,
            ..FeatureProviderSpec::default()
        })
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn file_mode_requires_vectors() {
        let m = data();
        let spec = FeatureProviderSpec {
            mode: FeatureMode::File,
            ..FeatureProviderSpec::default()
        };
        let p = FeatureProvider::new(spec).unwrap();
        let img = &m.images[0];
        let pairs = img.labelled_pairs(&m.categories, PairingThresholds::default(), 0.6, 0.5);
        assert!(matches!(p.bundle(img, &pairs[0]), Err(Error::MissingFeatures { .. })));

        let mut img = img.clone();
        img.features.remove(&pairs[0].object_idx);
        let p = FeatureProvider::new(FeatureProviderSpec::default()).unwrap();
        assert!(matches!(p.bundle(&img, &pairs[0]), Err(Error::MissingFeatures { .. })));
    }
}
