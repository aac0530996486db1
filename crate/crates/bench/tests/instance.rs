use netcode_mp::decoder::{decode_gaussian, decode_mp, DecodeOptions, TargetOutcome};
use netcode_mp::galois::Field;
use netcode_mp_bench::chain_instance;

#[test]
fn instances_decode_to_their_sources() {
    for (p, m) in [(2, 4), (5, 1)] {
        let field = Field::gf(p, m).unwrap();
        for k in [2, 5, 9] {
            let (net, obs, src) = chain_instance(k, &field, 1);
            let mp = decode_mp(&net, &obs, &[], &DecodeOptions::default()).unwrap();
            let want: Vec<TargetOutcome> = src.into_iter().map(TargetOutcome::Decoded).collect();
            assert_eq!(mp.targets.iter().map(|(_, o)| o.clone()).collect::<Vec<_>>(), want);
            assert_eq!(decode_gaussian(&net, &obs, &[]).unwrap().targets, mp.targets);
        }
    }
}
