use ftctl::lts::Lts;
use ftctl::test::TestGraph;

/// The two coffee machines that may testing cannot tell apart.
pub fn b1() -> Lts {
    Lts::parse(
        "alphabet: bang coffee coin tea
init: b
b coin l
l tea l1
l bang l2
l2 coffee l3
b coin r
r coffee r1
r bang r2
r2 tea r3
",
    )
    .unwrap()
}

pub fn b2() -> Lts {
    Lts::parse(
        "alphabet: bang coffee coin tea
init: b
b coin l
l tea l1
l bang l2
l2 tea l3
b coin r
r coffee r1
r bang r2
r2 coffee r3
",
    )
    .unwrap()
}

/// `p` branches on `a` and `b`; `q` then offers `c` and `d`, `t` offers `e`.
pub fn branching() -> Lts {
    Lts::from_triples(
        &["a", "b", "c", "d", "e"],
        "p",
        &[
            ("p", "a", "q"),
            ("p", "b", "t"),
            ("q", "c", "r"),
            ("q", "d", "s"),
            ("t", "e", "u"),
        ],
    )
    .unwrap()
}

pub fn coffee_test() -> TestGraph {
    TestGraph::parse("coin; (coffee; pass [] theta; bang; coffee; pass)").unwrap()
}

pub fn vending_test() -> TestGraph {
    TestGraph::parse("rec T. coin; (coffee; pass [] coin; (tea; pass [] bang; (tea; pass [] T)))")
        .unwrap()
}

pub fn coffee_alphabet() -> Vec<String> {
    ["bang", "coffee", "coin", "tea"].map(String::from).to_vec()
}
