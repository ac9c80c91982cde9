mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use reloc::nav::Route;
use reloc::percept::FrameLog;
use reloc::track::{compare_scenes, RelocationReport, TrackerConfig};

use common::{random_framelog, random_route};

proptest! {
    #[test]
    fn framelog_text_round_trip(seed in any::<u64>(), coarse in any::<bool>()) {
        let log = random_framelog(&mut ChaCha8Rng::seed_from_u64(seed), 20, 10, coarse);
        let text = log.to_jsonl();
        let back = FrameLog::from_jsonl(&text).unwrap();
        prop_assert_eq!(&back, &log);
        prop_assert_eq!(back.to_jsonl(), text);
    }

    #[test]
    fn route_text_round_trip(seed in any::<u64>()) {
        let route = random_route(&mut ChaCha8Rng::seed_from_u64(seed));
        let back = Route::from_json(&route.to_json()).unwrap();
        prop_assert_eq!(back.content_hash(), route.content_hash());
        prop_assert_eq!(back, route);
    }

    #[test]
    fn report_text_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pre = random_framelog(&mut rng, 20, 10, false);
        let mut post = random_framelog(&mut rng, 20, 10, false);
        post.route_hash = pre.route_hash.clone();
        let report = compare_scenes(&pre, &post, &TrackerConfig::default()).unwrap();
        prop_assert_eq!(RelocationReport::from_json(&report.to_json()).unwrap(), report);
    }
}

#[test]
fn blank_document_is_an_empty_log() {
    let log = FrameLog::from_jsonl("\n\n").unwrap();
    assert!(log.frames.is_empty());
    assert!(log.validate().is_ok());
}
