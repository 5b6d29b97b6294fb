//! The JSON files under `fixtures/v1` agree with the in-code fixtures. Run with `KIT_BLESS=1`
//! to rewrite them.

use std::collections::BTreeMap;
use std::path::PathBuf;

use kit_core::fixtures;
use kit_core::homology::{ChainMap, IntChainComplex};
use kit_core::io::{self, ComplexFile, StructureFile, TotalFile};
use kit_core::morse_lab::{flipped_fixture, small_r_fixture, FlowSpec};
use kit_core::IntMatrix;

const TRUNC: usize = 8;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/v1")
}

fn expected() -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut put = |name: &str, text: String| {
        out.insert(name.to_string(), text);
    };
    put("structures/exterior.json", io::structure_to_json(&fixtures::exterior_one(TRUNC)).unwrap());
    put("structures/curved_x2.json", io::structure_to_json(&fixtures::curved_x2(TRUNC)).unwrap());
    put("structures/split_unit.json", io::structure_to_json(&fixtures::split_unit(TRUNC)).unwrap());
    put("structures/random_dg_7.json", io::structure_to_json(&fixtures::random_dg_ainfty(7, TRUNC)).unwrap());

    let mut mutated = StructureFile::from_ainfty(&fixtures::exterior_one(TRUNC)).unwrap();
    let op = mutated.ops.iter_mut().find(|o| o.d == 2 && o.coeff == vec![-1]).unwrap();
    op.coeff = vec![1];
    put("structures/exterior_mutated.json", io::to_json(&mutated).unwrap());

    let mut constant = StructureFile::from_ainfty(&fixtures::curved_x2(TRUNC)).unwrap();
    constant.ops.iter_mut().find(|o| o.d == 0).unwrap().coeff = vec![1];
    put("structures/curved_constant.json", io::to_json(&constant).unwrap());

    for fx in fixtures::total_fixtures(TRUNC) {
        let file = TotalFile::from_parts(&fx.a, &fx.b, &fx.functor, &fx.delta, &fx.h).unwrap();
        let name = fx.name.replace(['/', '-'], "_");
        put(&format!("total/{}.json", name), io::to_json(&file).unwrap());
    }

    for (name, p) in fixtures::strip_fixtures() {
        put(&format!("strips/{}.json", name.replace('-', "_")), io::to_json(&p).unwrap());
    }
    let (p1, p2) = fixtures::gluing_pair();
    put("strips/glue_p1.json", io::to_json(&p1).unwrap());
    put("strips/glue_p2.json", io::to_json(&p2).unwrap());

    put("morse/small_r.json", io::to_json(&FlowSpec::new(small_r_fixture())).unwrap());
    put("morse/flipped.json", io::to_json(&FlowSpec::new(flipped_fixture())).unwrap());

    let base = IntChainComplex::new(0, vec![1, 2, 1], vec![IntMatrix::from_i64(&[&[1], &[1]]), IntMatrix::from_i64(&[&[1, -1]])])
        .unwrap();
    let cone = ChainMap::identity(&base).cone();
    put("complexes/cone_identity.json", io::to_json(&ComplexFile::from_complex(&cone).unwrap()).unwrap());
    let two = IntChainComplex::new(0, vec![1, 1], vec![IntMatrix::from_i64(&[&[2]])]).unwrap();
    put("complexes/times_two.json", io::to_json(&ComplexFile::from_complex(&two).unwrap()).unwrap());
    out
}

#[test]
fn shipped_fixtures_are_current() {
    let bless = std::env::var("KIT_BLESS").is_ok_and(|v| v == "1");
    let mut stale = Vec::new();
    for (name, text) in expected() {
        let path = root().join(&name);
        if bless {
            std::fs::create_dir_all(path.parent().unwrap()).unwrap();
            std::fs::write(&path, &text).unwrap();
            continue;
        }
        match std::fs::read_to_string(&path) {
            Ok(disk) if disk == text => {}
            _ => stale.push(name),
        }
    }
    assert!(stale.is_empty(), "stale fixture files (rerun with KIT_BLESS=1): {:?}", stale);
}
