//! Mixed-radix indexing: decode, encode, neighbors and seeded sampling.

use hlsdse::csd::parse_csd;
use hlsdse::space::build_index;

fn main() {
    let csd = parse_csd(include_str!("../fixtures/last_step_scan.csd")).unwrap();
    let index = build_index(&csd).unwrap();
    println!("{} configurations, radices {:?}", index.total, index.radices);

    for i in [0, 1, index.total - 1] {
        let c = index.decode(i).unwrap();
        println!("#{i} digits {:?}\n  {}\n  key {}", index.digits(i).unwrap(), c.key_text, c.config_key);
        assert_eq!(index.encode(&c.assignments).unwrap(), i);
    }

    let i = 777;
    println!("\nneighbors of #{i}: {:?}", index.neighbors(i).unwrap());
    println!("sample of 8 (seed 1): {:?}", index.sample_indices(8, 1).unwrap());

    let json = index.decode(i).unwrap().to_json();
    println!("\n#{i} as JSON:\n{}", serde_json::to_string_pretty(&json).unwrap());

    let bound_equal = index.iter().all(|c| c.assignments[3].last() == c.assignments[4].last());
    println!("\nevery configuration keeps sum partition factor == last_1 unroll factor: {bound_equal}");
}
