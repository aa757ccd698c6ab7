use crate::math::sqrt;
use crate::{Error, Result};

/// Axis-aligned box in pixel coordinates, `x1 < x2` and `y1 < y2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl BBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        let finite = x1.is_finite() && y1.is_finite() && x2.is_finite() && y2.is_finite();
        if !finite || x1 >= x2 || y1 >= y2 {
            return Err(Error::InvalidBox { x1, y1, x2, y2 });
        }
        Ok(Self { x1, y1, x2, y2 })
    }

    /// Square of the given side centered at `(cx, cy)`.
    pub fn square(cx: f64, cy: f64, side: f64) -> Result<Self> {
        let h = side / 2.0;
        Self::new(cx - h, cy - h, cx + h, cy + h)
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)
    }

    pub fn diagonal(&self) -> f64 {
        let (w, h) = (self.width(), self.height());
        sqrt(w * w + h * h)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self {
            x1: self.x1 + dx,
            y1: self.y1 + dy,
            x2: self.x2 + dx,
            y2: self.y2 + dy,
        }
    }

    pub fn contains(&self, other: &BBox) -> bool {
        self.x1 <= other.x1 && self.y1 <= other.y1 && self.x2 >= other.x2 && self.y2 >= other.y2
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }
}

/// Intersection over union; 0 for disjoint boxes.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let iw = a.x2.min(b.x2) - a.x1.max(b.x1);
    let ih = a.y2.min(b.y2) - a.y1.max(b.y1);
    if iw <= 0.0 || ih <= 0.0 {
        return 0.0;
    }
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Smallest box enclosing both inputs.
pub fn union_box(a: &BBox, b: &BBox) -> BBox {
    BBox {
        x1: a.x1.min(b.x1),
        y1: a.y1.min(b.y1),
        x2: a.x2.max(b.x2),
        y2: a.y2.max(b.y2),
    }
}

/// A scored, classed detection. `score` lies in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: BBox,
    pub class_id: u32,
    pub score: f64,
    pub is_human: bool,
}

impl Detection {
    pub fn new(bbox: BBox, class_id: u32, score: f64, is_human: bool) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::Integrity(alloc::format!(
                "detection score {score} outside [0, 1]"
            )));
        }
        Ok(Self {
            bbox,
            class_id,
            score,
            is_human,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(x1: f64, y1: f64, x2: f64, y2: f64) -> BBox {
        BBox::new(x1, y1, x2, y2).unwrap()
    }

    #[test]
    fn iou_examples() {
        let a = b(0.0, 0.0, 2.0, 2.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &b(5.0, 5.0, 6.0, 6.0)), 0.0);
        // touching edges do not overlap
        assert_eq!(iou(&a, &b(2.0, 0.0, 3.0, 2.0)), 0.0);
        let third = iou(&a, &b(1.0, 0.0, 3.0, 2.0));
        assert!((third - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_inverted_and_non_finite() {
        assert!(BBox::new(1.0, 0.0, 1.0, 2.0).is_err());
        assert!(BBox::new(0.0, 3.0, 1.0, 2.0).is_err());
        assert!(BBox::new(0.0, 0.0, f64::NAN, 2.0).is_err());
        assert!(BBox::new(0.0, 0.0, f64::INFINITY, 2.0).is_err());
    }

    #[test]
    fn union_box_examples() {
        let a = b(1.0, 1.0, 4.0, 5.0);
        assert_eq!(union_box(&a, &a), a);
        let inner = b(2.0, 2.0, 3.0, 3.0);
        assert_eq!(union_box(&a, &inner), a);
        let far = b(10.0, -2.0, 12.0, 0.5);
        let u = union_box(&a, &far);
        // hull oracle: every coordinate is the extreme of the two inputs
        let xs = [a.x1, a.x2, far.x1, far.x2];
        let ys = [a.y1, a.y2, far.y1, far.y2];
        assert_eq!(u.x1, xs.iter().cloned().fold(f64::INFINITY, f64::min));
        assert_eq!(u.x2, xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        assert_eq!(u.y1, ys.iter().cloned().fold(f64::INFINITY, f64::min));
        assert_eq!(u.y2, ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        assert!(u.contains(&a) && u.contains(&far));
    }

    fn arb_box() -> impl Strategy<Value = BBox> {
        (-50.0..50.0f64, -50.0..50.0f64, 0.1..40.0f64, 0.1..40.0f64)
            .prop_map(|(x, y, w, h)| b(x, y, x + w, y + h))
    }

    proptest! {
        #[test]
        fn iou_symmetric_and_bounded(a in arb_box(), c in arb_box()) {
            let ab = iou(&a, &c);
            prop_assert_eq!(ab, iou(&c, &a));
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn union_contains_both(a in arb_box(), c in arb_box()) {
            let u = union_box(&a, &c);
            prop_assert!(u.contains(&a) && u.contains(&c));
        }
    }
}
