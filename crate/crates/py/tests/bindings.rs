use pyo3::prelude::*;
use pyo3::types::{PyDict, PyModule};

fn run(code: &str) {
    Python::attach(|py| {
        let m = PyModule::new(py, "autodens_py").unwrap();
        autodens_py::register(&m).unwrap();
        let globals = PyDict::new(py);
        globals.set_item("ad", m).unwrap();
        let src = std::ffi::CString::new(code).unwrap();
        if let Err(e) = py.run(&src, Some(&globals), None) {
            e.print(py);
            panic!("python code failed");
        }
    });
}

const PF: &str = "base 2\nstates a b c d\ninitial a\noutput a=1 b=1 c=0 d=0\n\
delta a 0 a\ndelta a 1 b\ndelta b 0 c\ndelta b 1 b\ndelta c 0 a\ndelta c 1 d\ndelta d 0 c\ndelta d 1 d\n";

#[test]
fn paperfolding_through_python() {
    run(&format!(
        r#"
a = ad.Dfao({PF:?})
assert a.base == 2 and len(a) == 4
def pf(n):
    while n % 2 == 0:
        n //= 2
    return "1" if n % 4 == 1 else "0"
assert a.prefix(200) == [pf(n + 1) for n in range(200)]
assert ad.prime_density(a) == {{"0": "1/2", "1": "1/2"}}
r = ad.density(a, "primes")
assert r["exists"] and r["density"]["1"] == "1/2"
assert ad.qr_count(1, 8) == "1/2"
v = ad.verify(a, "primes", 20000)
assert v["comparison"]["pass"]
"#
    ));
}

#[test]
fn errors_become_value_errors() {
    run(
        r#"
try:
    ad.Dfao("base 2\n")
    raise AssertionError("parsed")
except ValueError:
    pass
try:
    ad.qr_count(1, 0)
    raise AssertionError("accepted")
except ValueError:
    pass
"#,
    );
}
