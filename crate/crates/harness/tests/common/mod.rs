#![allow(dead_code)]

use stratpol::{CostMatrix, Instance};

pub const TOY_JSON: &str = r#"{
  "m": 3,
  "gamma": 0.1,
  "p": [0.1, 0.4, 0.5],
  "q": [1.0, 0.7, 0.4],
  "cost": [[0, 0, 0], [0.3, 0, 0], [1.2, 0.3, 0]],
  "meta": {"name": "toy"}
}"#;

pub fn toy() -> Instance {
    let cost = CostMatrix::from_rows(vec![
        vec![0.0, 0.0, 0.0],
        vec![0.3, 0.0, 0.0],
        vec![1.2, 0.3, 0.0],
    ])
    .unwrap();
    let mut inst = Instance::new(vec![0.1, 0.4, 0.5], vec![1.0, 0.7, 0.4], 0.1, cost);
    inst.meta.insert("name".into(), "toy".into());
    inst
}
