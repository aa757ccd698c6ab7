use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::hoi::NUM_PARTS;
use crate::nn::{maxpool2d, maxpool2d_backward, relu, relu_backward, Conv2d, ConvGeometry, Dense, ParamId, ParamStore, Pooled};
use crate::raster::{MapStack, MAP_SIZE};
use crate::{Error, Result};

/// Per-pair numeric inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBundle {
    /// Raw human instance features.
    pub human: Vec<f64>,
    /// Raw object instance features.
    pub object: Vec<f64>,
    /// Part features; all zeros for invalid parts.
    pub parts: [Vec<f64>; NUM_PARTS],
    pub maps: MapStack,
}

/// Outputs of the human, object and spatial streams.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamOutputs {
    pub f_h: Vec<f64>,
    pub f_o: Vec<f64>,
    pub f_sp: Vec<f64>,
}

/// Two dense layers with ReLU over an instance feature vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceTrunk {
    pub fc1: Dense,
    pub fc2: Dense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrunkTrace {
    h1_pre: Vec<f64>,
    h1: Vec<f64>,
    h2_pre: Vec<f64>,
}

impl InstanceTrunk {
    pub fn new<R: Rng + ?Sized>(store: &mut ParamStore, name: &str, inputs: usize, width: usize, rng: &mut R) -> Self {
        Self {
            fc1: Dense::new(store, &format!("{name}.fc1"), inputs, width, rng),
            fc2: Dense::new(store, &format!("{name}.fc2"), width, width, rng),
        }
    }

    pub fn inputs(&self) -> usize {
        self.fc1.inputs
    }

    pub fn width(&self) -> usize {
        self.fc2.outputs
    }

    pub fn forward(&self, store: &ParamStore, x: &[f64]) -> (Vec<f64>, TrunkTrace) {
        let h1_pre = self.fc1.forward(store, x);
        let h1 = relu(&h1_pre);
        let h2_pre = self.fc2.forward(store, &h1);
        (relu(&h2_pre), TrunkTrace { h1_pre, h1, h2_pre })
    }

    pub fn backward(&self, store: &mut ParamStore, x: &[f64], t: &TrunkTrace, d_out: &[f64]) {
        let d2 = relu_backward(&t.h2_pre, d_out);
        let dh1 = self.fc2.backward(store, &t.h1, &d2, true);
        let d1 = relu_backward(&t.h1_pre, &dh1);
        self.fc1.backward(store, x, &d1, false);
    }

    pub fn params(&self) -> Vec<ParamId> {
        [self.fc1.params(), self.fc2.params()].concat()
    }
}

/// Dense-ReLU-dense classifier head.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpHead {
    pub fc1: Dense,
    pub fc2: Dense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadTrace {
    h_pre: Vec<f64>,
    h: Vec<f64>,
}

impl MlpHead {
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        name: &str,
        inputs: usize,
        hidden: usize,
        outputs: usize,
        rng: &mut R,
    ) -> Self {
        Self {
            fc1: Dense::new(store, &format!("{name}.fc1"), inputs, hidden, rng),
            fc2: Dense::new(store, &format!("{name}.fc2"), hidden, outputs, rng),
        }
    }

    pub fn forward(&self, store: &ParamStore, x: &[f64]) -> (Vec<f64>, HeadTrace) {
        let h_pre = self.fc1.forward(store, x);
        let h = relu(&h_pre);
        (self.fc2.forward(store, &h), HeadTrace { h_pre, h })
    }

    /// Returns the gradient with respect to the head input.
    pub fn backward(&self, store: &mut ParamStore, x: &[f64], t: &HeadTrace, d_out: &[f64]) -> Vec<f64> {
        let dh = self.fc2.backward(store, &t.h, d_out, true);
        let dpre = relu_backward(&t.h_pre, &dh);
        self.fc1.backward(store, x, &dpre, true)
    }

    pub fn params(&self) -> Vec<ParamId> {
        [self.fc1.params(), self.fc2.params()].concat()
    }
}

/// Convolutional stack of the spatial(-pose) stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpatialConfig {
    pub conv1_channels: usize,
    pub conv1_kernel: usize,
    pub conv1_stride: usize,
    pub conv2_channels: usize,
    pub conv2_kernel: usize,
    pub pool: usize,
}

impl Default for SpatialConfig {
    fn default() -> Self {
        Self {
            conv1_channels: 4,
            conv1_kernel: 4,
            conv1_stride: 4,
            conv2_channels: 8,
            conv2_kernel: 3,
            pool: 2,
        }
    }
}

/// conv-ReLU-pool, conv-ReLU-pool, then two dense layers with ReLU.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialStream {
    pub conv1: Conv2d,
    pub conv2: Conv2d,
    pub fc1: Dense,
    pub fc2: Dense,
    pub pool: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialTrace {
    c1: Vec<f64>,
    p1: Pooled,
    c2: Vec<f64>,
    p2: Pooled,
    h1_pre: Vec<f64>,
    h1: Vec<f64>,
    h2_pre: Vec<f64>,
}

impl SpatialStream {
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        name: &str,
        in_channels: usize,
        cfg: &SpatialConfig,
        width: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if cfg.pool == 0 {
            return Err(Error::InvalidGeometry(format!("zero pooling window in {cfg:?}")));
        }
        let g1 = ConvGeometry {
            in_channels,
            in_h: MAP_SIZE,
            in_w: MAP_SIZE,
            out_channels: cfg.conv1_channels,
            kernel_h: cfg.conv1_kernel,
            kernel_w: cfg.conv1_kernel,
            stride: cfg.conv1_stride,
            padding: 0,
        };
        g1.validate()?;
        let s1 = g1.out_h() / cfg.pool;
        let g2 = ConvGeometry {
            in_channels: cfg.conv1_channels,
            in_h: s1,
            in_w: s1,
            out_channels: cfg.conv2_channels,
            kernel_h: cfg.conv2_kernel,
            kernel_w: cfg.conv2_kernel,
            stride: 1,
            padding: cfg.conv2_kernel / 2,
        };
        g2.validate()?;
        let s2 = g2.out_h() / cfg.pool;
        if s2 == 0 {
            return Err(Error::InvalidGeometry(format!("spatial stream collapses to zero size with {cfg:?}")));
        }
        let flat = cfg.conv2_channels * s2 * s2;
        Ok(Self {
            conv1: Conv2d::new(store, &format!("{name}.conv1"), g1, rng)?,
            conv2: Conv2d::new(store, &format!("{name}.conv2"), g2, rng)?,
            fc1: Dense::new(store, &format!("{name}.fc1"), flat, width, rng),
            fc2: Dense::new(store, &format!("{name}.fc2"), width, width, rng),
            pool: cfg.pool,
        })
    }

    pub fn in_channels(&self) -> usize {
        self.conv1.geometry.in_channels
    }

    pub fn forward(&self, store: &ParamStore, x: &[f64]) -> (Vec<f64>, SpatialTrace) {
        let g1 = &self.conv1.geometry;
        let g2 = &self.conv2.geometry;
        let c1 = self.conv1.forward(store, x);
        let p1 = maxpool2d(&relu(&c1), g1.out_channels, g1.out_h(), g1.out_w(), self.pool);
        let c2 = self.conv2.forward(store, &p1.values);
        let p2 = maxpool2d(&relu(&c2), g2.out_channels, g2.out_h(), g2.out_w(), self.pool);
        let h1_pre = self.fc1.forward(store, &p2.values);
        let h1 = relu(&h1_pre);
        let h2_pre = self.fc2.forward(store, &h1);
        let out = relu(&h2_pre);
        (
            out,
            SpatialTrace {
                c1,
                p1,
                c2,
                p2,
                h1_pre,
                h1,
                h2_pre,
            },
        )
    }

    /// Accumulates parameter gradients; the map input gets no gradient.
    pub fn backward(&self, store: &mut ParamStore, x: &[f64], t: &SpatialTrace, d_out: &[f64]) {
        let d2 = relu_backward(&t.h2_pre, d_out);
        let dh1 = self.fc2.backward(store, &t.h1, &d2, true);
        let d1 = relu_backward(&t.h1_pre, &dh1);
        let dp2 = self.fc1.backward(store, &t.p2.values, &d1, true);
        let dc2 = relu_backward(&t.c2, &maxpool2d_backward(&dp2, &t.p2.argmax, t.c2.len()));
        let dp1 = self.conv2.backward(store, &t.p1.values, &dc2, true);
        let dc1 = relu_backward(&t.c1, &maxpool2d_backward(&dp1, &t.p1.argmax, t.c1.len()));
        self.conv1.backward(store, x, &dc1, false);
    }

    pub fn params(&self) -> Vec<ParamId> {
        [self.conv1.params(), self.conv2.params(), self.fc1.params(), self.fc2.params()].concat()
    }
}
