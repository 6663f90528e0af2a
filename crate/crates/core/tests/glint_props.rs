use irisveil::glint::{remove_glints, threshold_glints, GlintMask};
use irisveil::GrayImage;
use proptest::prelude::*;

fn image() -> impl Strategy<Value = GrayImage> {
    prop::collection::vec(any::<u8>(), 12 * 10).prop_map(|d| GrayImage::new(12, 10, d).unwrap())
}

proptest! {
    #[test]
    fn higher_threshold_gives_subset(img in image(), t in 1u8..255, dt in 0u8..50) {
        let lo = threshold_glints(&img, None, t).unwrap();
        let hi = threshold_glints(&img, None, t.saturating_add(dt)).unwrap();
        for (h, l) in hi.bits().iter().zip(lo.bits()) {
            prop_assert!(!h || *l);
        }
    }

    #[test]
    fn removal_keeps_other_pixels(img in image(), flags in prop::collection::vec(prop::bool::weighted(0.2), 120)) {
        let mut glints = GlintMask::empty(12, 10);
        for (i, &f) in flags.iter().enumerate() {
            glints.set(i % 12, i / 12, f);
        }
        prop_assume!(glints.count() < 120);
        let out = remove_glints(&img, &glints).unwrap();
        let (mut lo, mut hi) = (u8::MAX, u8::MIN);
        for ((&o, &v), &g) in out.data().iter().zip(img.data()).zip(&flags) {
            if !g {
                prop_assert_eq!(o, v);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        for (&o, &g) in out.data().iter().zip(&flags) {
            if g {
                prop_assert!(lo <= o && o <= hi);
            }
        }
    }
}
