use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::streams::{FeatureBundle, HeadTrace, InstanceTrunk, MlpHead, SpatialConfig, SpatialStream, StreamOutputs, TrunkTrace};
use super::streams::SpatialTrace;
use crate::hoi::NUM_PARTS;
use crate::math::{argmax, dot, sigmoid};
use crate::nn::{bce, bce_logit_grad, ParamId, ParamStore};
use crate::raster::MapStack;
use crate::{Error, Result};

/// Widths of the discriminator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetConfig {
    /// Length of the raw instance feature vectors.
    pub feature_dim: usize,
    /// Length of each part feature vector.
    pub part_dim: usize,
    /// Output width of the human, object and spatial streams.
    pub hidden: usize,
    /// Hidden width of the part and instance classifiers.
    pub classifier_hidden: usize,
    /// One classifier for all ten parts instead of ten.
    pub shared_part_classifier: bool,
    pub spatial: SpatialConfig,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            feature_dim: 32,
            part_dim: 8,
            hidden: 64,
            classifier_hidden: 32,
            shared_part_classifier: false,
            spatial: SpatialConfig::default(),
        }
    }
}

/// Scores produced by the discriminator for one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DScores {
    /// Part logits.
    pub s_part: [f64; NUM_PARTS],
    pub p_part: [f64; NUM_PARTS],
    /// Instance logit.
    pub s_inst: f64,
    pub p_inst: f64,
    /// Maximum part logit.
    pub s_agg: f64,
    /// Part attaining `s_agg` (lowest index on ties).
    pub agg_index: usize,
}

impl DScores {
    /// Aggregated part probability, `sigmoid(s_agg)`.
    pub fn p_agg(&self) -> f64 {
        sigmoid(self.s_agg)
    }
}

/// Max-pooling over part logits: the instance is interactive iff some part is.
pub fn aggregate_parts(s_part: &[f64]) -> (f64, usize) {
    argmax(s_part)
}

/// Scales a part feature by its interactiveness probability.
pub fn attention_reweight(p: f64, f: &[f64]) -> Vec<f64> {
    f.iter().map(|v| p * v).collect()
}

/// The three discriminator loss terms and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DLoss {
    /// Instance-level cross-entropy.
    pub l_h: f64,
    /// Cross-entropy of the aggregated part prediction.
    pub l_hp: f64,
    /// Consistency between instance logit and max part logit.
    pub l_c: f64,
    pub total: f64,
}

/// Loss and its gradients with respect to `s_inst` and `s_part`.
pub fn loss_d(scores: &DScores, label: bool) -> (DLoss, f64, [f64; NUM_PARTS]) {
    let y = if label { 1.0 } else { 0.0 };
    let p_agg = scores.p_agg();
    let diff = scores.s_inst - scores.s_agg;
    let l_h = bce(scores.p_inst, y);
    let l_hp = bce(p_agg, y);
    let l_c = diff * diff;
    let d_inst = bce_logit_grad(scores.p_inst, y) + 2.0 * diff;
    let mut d_part = [0.0; NUM_PARTS];
    d_part[scores.agg_index] = bce_logit_grad(p_agg, y) - 2.0 * diff;
    (
        DLoss {
            l_h,
            l_hp,
            l_c,
            total: l_h + l_hp + l_c,
        },
        d_inst,
        d_part,
    )
}

/// Cached forward state for one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DForward {
    pub scores: DScores,
    pub streams: StreamOutputs,
    human: TrunkTrace,
    object: TrunkTrace,
    spatial: SpatialTrace,
    part_inputs: Vec<Vec<f64>>,
    part_traces: Vec<HeadTrace>,
    inst_input: Vec<f64>,
    inst_trace: HeadTrace,
}

/// The interactiveness discriminator.
#[derive(Debug, Clone, PartialEq)]
pub struct Discriminator {
    pub human: InstanceTrunk,
    pub object: InstanceTrunk,
    /// Spatial-pose stream over the three-plane map stack.
    pub spatial: SpatialStream,
    /// Ten part classifiers, or one when shared.
    pub parts: Vec<MlpHead>,
    pub instance: MlpHead,
    pub config: NetConfig,
}

impl Discriminator {
    pub fn new<R: Rng + ?Sized>(store: &mut ParamStore, prefix: &str, config: NetConfig, rng: &mut R) -> Result<Self> {
        if config.feature_dim == 0 || config.part_dim == 0 || config.hidden == 0 || config.classifier_hidden == 0 {
            return Err(Error::Config(format!("zero width in {config:?}")));
        }
        let (f, p, w, ch) = (config.feature_dim, config.part_dim, config.hidden, config.classifier_hidden);
        let human = InstanceTrunk::new(store, &format!("{prefix}.human"), f, w, rng);
        let object = InstanceTrunk::new(store, &format!("{prefix}.object"), f, w, rng);
        let spatial = SpatialStream::new(store, &format!("{prefix}.spatial"), MapStack::CHANNELS, &config.spatial, w, rng)?;
        let n_heads = if config.shared_part_classifier { 1 } else { NUM_PARTS };
        let parts = (0..n_heads)
            .map(|i| MlpHead::new(store, &format!("{prefix}.part{i}"), p + 3 * w, ch, 1, rng))
            .collect();
        let instance = MlpHead::new(store, &format!("{prefix}.instance"), NUM_PARTS * p + 3 * w, ch, 1, rng);
        Ok(Self {
            human,
            object,
            spatial,
            parts,
            instance,
            config,
        })
    }

    fn head(&self, part: usize) -> &MlpHead {
        if self.parts.len() == 1 {
            &self.parts[0]
        } else {
            &self.parts[part]
        }
    }

    pub fn check_bundle(&self, b: &FeatureBundle) -> Result<()> {
        let bad = |what: &'static str, expected: usize, got: usize| {
            Err(Error::LengthMismatch {
                op: what,
                expected,
                got,
            })
        };
        if b.human.len() != self.config.feature_dim {
            return bad("human features", self.config.feature_dim, b.human.len());
        }
        if b.object.len() != self.config.feature_dim {
            return bad("object features", self.config.feature_dim, b.object.len());
        }
        for fp in &b.parts {
            if fp.len() != self.config.part_dim {
                return bad("part features", self.config.part_dim, fp.len());
            }
        }
        Ok(())
    }

    /// Human, object and spatial-pose stream outputs.
    pub fn stream_forward(&self, store: &ParamStore, bundle: &FeatureBundle) -> StreamOutputs {
        self.forward(store, bundle).streams
    }

    /// Logit of part `i` from its feature and the three stream outputs.
    pub fn part_classifier(&self, store: &ParamStore, i: usize, f_p: &[f64], s: &StreamOutputs) -> f64 {
        let x = [f_p, &s.f_h, &s.f_o, &s.f_sp].concat();
        self.head(i).forward(store, &x).0[0]
    }

    /// Instance logit from the spatial feature, the concatenated reweighted
    /// part features and the instance features.
    pub fn instance_classifier(&self, store: &ParamStore, f_sp: &[f64], f_p_reweighted: &[f64], f_h: &[f64], f_o: &[f64]) -> f64 {
        let x = [f_sp, f_p_reweighted, f_h, f_o].concat();
        self.instance.forward(store, &x).0[0]
    }

    pub fn forward(&self, store: &ParamStore, bundle: &FeatureBundle) -> DForward {
        let (f_h, human) = self.human.forward(store, &bundle.human);
        let (f_o, object) = self.object.forward(store, &bundle.object);
        let (f_sp, spatial) = self.spatial.forward(store, bundle.maps.channels(self.spatial.in_channels()));

        let mut s_part = [0.0; NUM_PARTS];
        let mut p_part = [0.0; NUM_PARTS];
        let mut part_inputs = Vec::with_capacity(NUM_PARTS);
        let mut part_traces = Vec::with_capacity(NUM_PARTS);
        let mut inst_input = Vec::with_capacity(f_sp.len() + NUM_PARTS * self.config.part_dim + 2 * f_h.len());
        inst_input.extend_from_slice(&f_sp);
        for i in 0..NUM_PARTS {
            let x = [bundle.parts[i].as_slice(), &f_h, &f_o, &f_sp].concat();
            let (out, trace) = self.head(i).forward(store, &x);
            s_part[i] = out[0];
            p_part[i] = sigmoid(out[0]);
            inst_input.extend(attention_reweight(p_part[i], &bundle.parts[i]));
            part_inputs.push(x);
            part_traces.push(trace);
        }
        inst_input.extend_from_slice(&f_h);
        inst_input.extend_from_slice(&f_o);
        let (out, inst_trace) = self.instance.forward(store, &inst_input);
        let s_inst = out[0];
        let (s_agg, agg_index) = aggregate_parts(&s_part);

        DForward {
            scores: DScores {
                s_part,
                p_part,
                s_inst,
                p_inst: sigmoid(s_inst),
                s_agg,
                agg_index,
            },
            streams: StreamOutputs { f_h, f_o, f_sp },
            human,
            object,
            spatial,
            part_inputs,
            part_traces,
            inst_input,
            inst_trace,
        }
    }

    /// Backpropagates logit gradients into the parameters. Returns the
    /// gradient with respect to each part feature vector.
    pub fn backward(
        &self,
        store: &mut ParamStore,
        bundle: &FeatureBundle,
        fwd: &DForward,
        d_inst: f64,
        d_part: &[f64; NUM_PARTS],
    ) -> [Vec<f64>; NUM_PARTS] {
        let pd = self.config.part_dim;
        let (w_sp, w_h) = (fwd.streams.f_sp.len(), fwd.streams.f_h.len());
        let mut d_fh = vec![0.0; w_h];
        let mut d_fo = vec![0.0; fwd.streams.f_o.len()];
        let mut d_fsp = vec![0.0; w_sp];
        let mut d_parts: [Vec<f64>; NUM_PARTS] = core::array::from_fn(|_| vec![0.0; pd]);
        let mut d_s_part = *d_part;

        let dx = self.instance.backward(store, &fwd.inst_input, &fwd.inst_trace, &[d_inst]);
        add(&mut d_fsp, &dx[..w_sp]);
        let tail = w_sp + NUM_PARTS * pd;
        add(&mut d_fh, &dx[tail..tail + w_h]);
        add(&mut d_fo, &dx[tail + w_h..]);
        for i in 0..NUM_PARTS {
            // product rule through p_i * f_i
            let d_reweighted = &dx[w_sp + i * pd..w_sp + (i + 1) * pd];
            let p = fwd.scores.p_part[i];
            let d_p = dot(d_reweighted, &bundle.parts[i]);
            for (d, &g) in d_parts[i].iter_mut().zip(d_reweighted) {
                *d += p * g;
            }
            d_s_part[i] += d_p * p * (1.0 - p);
        }

        for i in 0..NUM_PARTS {
            if d_s_part[i] == 0.0 {
                continue;
            }
            let dx = self.head(i).backward(store, &fwd.part_inputs[i], &fwd.part_traces[i], &[d_s_part[i]]);
            add(&mut d_parts[i], &dx[..pd]);
            add(&mut d_fh, &dx[pd..pd + w_h]);
            add(&mut d_fo, &dx[pd + w_h..pd + 2 * w_h]);
            add(&mut d_fsp, &dx[pd + 2 * w_h..]);
        }

        self.human.backward(store, &bundle.human, &fwd.human, &d_fh);
        self.object.backward(store, &bundle.object, &fwd.object, &d_fo);
        self.spatial
            .backward(store, bundle.maps.channels(self.spatial.in_channels()), &fwd.spatial, &d_fsp);
        d_parts
    }

    /// Forward, loss and backward for one labelled pair.
    pub fn train_step(&self, store: &mut ParamStore, bundle: &FeatureBundle, label: bool, weight: f64) -> DLoss {
        let fwd = self.forward(store, bundle);
        let (loss, d_inst, mut d_part) = loss_d(&fwd.scores, label);
        for d in d_part.iter_mut() {
            *d *= weight;
        }
        self.backward(store, bundle, &fwd, d_inst * weight, &d_part);
        loss
    }

    pub fn params(&self) -> Vec<ParamId> {
        let mut ids = self.human.params();
        ids.extend(self.object.params());
        ids.extend(self.spatial.params());
        for h in &self.parts {
            ids.extend(h.params());
        }
        ids.extend(self.instance.params());
        ids
    }
}

fn add(acc: &mut [f64], x: &[f64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{grad_check, grad_check_coords};
    use crate::testutil::{jitter_params, rand_vec, random_bundle};
    use rand::seq::index::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> NetConfig {
        NetConfig {
            feature_dim: 6,
            part_dim: 3,
            hidden: 5,
            classifier_hidden: 4,
            ..NetConfig::default()
        }
    }

    fn build(cfg: NetConfig, seed: u64) -> (ParamStore, Discriminator, ChaCha8Rng) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let d = Discriminator::new(&mut store, "d", cfg, &mut rng).unwrap();
        jitter_params(&mut store, &mut rng);
        (store, d, rng)
    }

    #[test]
    fn total_loss_gradient_matches_finite_differences() {
        for seed in 0..4 {
            let (mut store, d, mut rng) = build(small(), seed);
            let bundle = random_bundle(&mut rng, 6, 3);
            let label = seed % 2 == 0;
            store.zero_grad();
            d.train_step(&mut store, &bundle, label, 1.0);
            let analytic = store.flat_grads();
            let point = store.flat_values();
            let coords = sample(&mut rng, point.len(), 200).into_vec();
            let mut probe = store.clone();
            let err = grad_check_coords(
                |theta| {
                    probe.set_flat_values(theta);
                    let f = d.forward(&probe, &bundle);
                    loss_d(&f.scores, label).0.total
                },
                &analytic,
                &point,
                1e-5,
                &coords,
            );
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }

    #[test]
    fn part_feature_gradient_includes_attention_path() {
        let (mut store, d, mut rng) = build(small(), 9);
        let bundle = random_bundle(&mut rng, 6, 3);
        let fwd = d.forward(&store, &bundle);
        let (_, di, dp) = loss_d(&fwd.scores, true);
        let grads = d.backward(&mut store, &bundle, &fwd, di, &dp);
        let analytic: Vec<f64> = grads.concat();
        let point: Vec<f64> = bundle.parts.concat();
        let err = grad_check(
            |x| {
                let mut b = bundle.clone();
                for (i, fp) in b.parts.iter_mut().enumerate() {
                    fp.copy_from_slice(&x[i * 3..(i + 1) * 3]);
                }
                loss_d(&d.forward(&store, &b).scores, true).0.total
            },
            &analytic,
            &point,
            1e-5,
        );
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn attention_product_rule() {
        // f(p, v) = sum(w * p * v)
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = rand_vec(&mut rng, 4);
        let x: Vec<f64> = [alloc::vec![0.3], rand_vec(&mut rng, 4)].concat();
        let f = |x: &[f64]| dot(&w, &attention_reweight(x[0], &x[1..]));
        let mut analytic = alloc::vec![dot(&w, &x[1..])];
        analytic.extend(w.iter().map(|wi| wi * x[0]));
        assert!(grad_check(f, &analytic, &x, 1e-5) < 1e-8);
        assert_eq!(attention_reweight(0.0, &[1.0, -2.0]), [0.0, -0.0]);
        assert_eq!(attention_reweight(1.0, &[1.0, -2.0]), [1.0, -2.0]);
    }

    #[test]
    fn aggregation_ties_and_identity() {
        assert_eq!(aggregate_parts(&[0.5; NUM_PARTS]), (0.5, 0));
        let mut s = [0.0; NUM_PARTS];
        s[7] = 3.0;
        assert_eq!(aggregate_parts(&s), (3.0, 7));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let s: Vec<f64> = (0..NUM_PARTS).map(|_| rng.random_range(-20.0..20.0)).collect();
            let (m, _) = aggregate_parts(&s);
            let max_p = s.iter().map(|&v| sigmoid(v)).fold(f64::MIN, f64::max);
            assert!((sigmoid(m) - max_p).abs() <= 1e-12);
        }
    }

    #[test]
    fn loss_terms() {
        let mut scores = DScores {
            s_part: [0.2, -1.0, 1.5, 0.0, 0.1, 0.3, -0.4, 0.9, 1.1, 0.0],
            p_part: [0.0; NUM_PARTS],
            s_inst: 0.0,
            p_inst: 0.0,
            s_agg: 0.0,
            agg_index: 0,
        };
        let (agg, idx) = aggregate_parts(&scores.s_part);
        scores.s_agg = agg;
        scores.agg_index = idx;
        scores.s_inst = agg;
        scores.p_inst = sigmoid(agg);
        let (l, _, _) = loss_d(&scores, true);
        assert_eq!(l.l_c, 0.0);
        assert_eq!(l.total, l.l_h + l.l_hp + l.l_c);

        scores.s_inst = 40.0;
        scores.p_inst = sigmoid(40.0);
        scores.s_part[idx] = 40.0;
        scores.s_agg = 40.0;
        let (l, _, _) = loss_d(&scores, true);
        assert!(l.l_h < 1e-6 && l.l_hp < 1e-6 && l.l_c == 0.0);
    }

    #[test]
    fn finite_with_all_parts_invalid() {
        let (store, d, mut rng) = build(NetConfig::default(), 5);
        let mut bundle = random_bundle(&mut rng, 32, 8);
        for fp in bundle.parts.iter_mut() {
            fp.fill(0.0);
        }
        let s = d.forward(&store, &bundle).scores;
        assert!(s.s_inst.is_finite() && s.s_part.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn mil_ordering_after_forward() {
        let (store, d, mut rng) = build(small(), 6);
        for _ in 0..20 {
            let s = d.forward(&store, &random_bundle(&mut rng, 6, 3)).scores;
            assert!(s.p_part.iter().all(|&p| s.p_agg() >= p));
        }
    }

    #[test]
    fn shared_part_classifier_has_one_head() {
        let cfg = NetConfig {
            shared_part_classifier: true,
            ..small()
        };
        let (store, d, _) = build(cfg, 1);
        let (store_sep, d_sep, _) = build(small(), 1);
        assert_eq!(d.parts.len(), 1);
        assert_eq!(d_sep.parts.len(), NUM_PARTS);
        let head = store.count(&d.parts[0].params());
        assert_eq!(store_sep.num_scalars() - store.num_scalars(), 9 * head);
    }

    #[test]
    fn rejects_bad_bundle() {
        let (_, d, mut rng) = build(small(), 2);
        let bundle = random_bundle(&mut rng, 7, 3);
        assert!(d.check_bundle(&bundle).is_err());
    }

    #[test]
    fn instance_classifier_matches_forward() {
        let (store, d, mut rng) = build(small(), 8);
        let bundle = random_bundle(&mut rng, 6, 3);
        let fwd = d.forward(&store, &bundle);
        let s = &fwd.streams;
        let reweighted: Vec<f64> = (0..NUM_PARTS)
            .flat_map(|i| attention_reweight(fwd.scores.p_part[i], &bundle.parts[i]))
            .collect();
        assert_eq!(d.instance_classifier(&store, &s.f_sp, &reweighted, &s.f_h, &s.f_o), fwd.scores.s_inst);
        for i in 0..NUM_PARTS {
            assert_eq!(d.part_classifier(&store, i, &bundle.parts[i], s), fwd.scores.s_part[i]);
        }
    }
}
