//! Bundled example documents.

pub const FIXTURE_NAMES: [&str; 5] = ["meet-poset", "cube-poset", "parallel-pair", "walking-iso", "collapse"];

pub fn fixture(name: &str) -> Option<&'static str> {
    Some(match name {
        "meet-poset" => include_str!("../fixtures/meet-poset.json"),
        "cube-poset" => include_str!("../fixtures/cube-poset.json"),
        "parallel-pair" => include_str!("../fixtures/parallel-pair.json"),
        "walking-iso" => include_str!("../fixtures/walking-iso.json"),
        "collapse" => include_str!("../fixtures/collapse.json"),
        _ => return None,
    })
}
