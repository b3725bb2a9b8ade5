//! Built-in configurations that regenerate the published figures as data.
//!
//! A preset may have several parts; each part is an ordinary configuration
//! and produces its own table.

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub parts: &'static [(&'static str, &'static str)],
}

impl Preset {
    /// Parses every part; presets are checked by the test suite, so failure
    /// here is a bug.
    pub fn configs(&self) -> Result<Vec<(&'static str, crate::config::ExperimentConfig)>, crate::ConfigError> {
        self.parts.iter().map(|(label, text)| Ok((*label, crate::config::parse(text)?))).collect()
    }
}

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub static PRESETS: &[Preset] = &[
    Preset {
        name: "fig2",
        description: "ohmic bath: geometric phase correction over (p, gamma0), Lambda/Omega = 100",
        parts: &[("ohmic", FIG2)],
    },
    Preset {
        name: "fig3",
        description: "ohmic bath: exact correction against the perturbative series along p",
        parts: &[("ohmic", FIG3)],
    },
    Preset {
        name: "fig4",
        description: "supraohmic bath: geometric phase correction over (p, gamma0)",
        parts: &[("supraohmic", FIG4)],
    },
    Preset {
        name: "fig5",
        description: "supraohmic bath: exact correction against the perturbative series along p",
        parts: &[("supraohmic", FIG5)],
    },
    Preset {
        name: "fig6",
        description: "concurrence and entropy in time, gamma0 = 0.002, p in {0.01, 0.2, 0.5}",
        parts: &[("ohmic", FIG6_OHMIC), ("supraohmic", FIG6_SUPRA)],
    },
    Preset {
        name: "fig7",
        description: "concurrence and entropy in time, gamma0 = 0.1, p in {0.01, 0.2, 0.5}",
        parts: &[("ohmic", FIG7_OHMIC), ("supraohmic", FIG7_SUPRA)],
    },
    Preset {
        name: "fig8",
        description: "spin bath, N = 100: geometric phase over (p, lambda/h)",
        parts: &[("spin", FIG8)],
    },
    Preset {
        name: "fig9",
        description: "spin bath, N = 100: exact correction against the perturbative series along lambda/h",
        parts: &[("spin", FIG9)],
    },
    Preset {
        name: "fig10",
        description: "spin bath concurrence in time for several couplings and p",
        parts: &[("n10", FIG10_N10), ("n100", FIG10_N100)],
    },
    Preset {
        name: "fig11",
        description: "spin bath concurrence and entropy in time, lambda/h = 0.1",
        parts: &[("n10", FIG11_N10), ("n100", FIG11_N100)],
    },
];

const FIG2: &str = r#"
outputs = ["geophase", "delta_phi"]

[state]
kind = "werner"
branch = "theta"

[env]
kind = "boson"
spectral = "ohmic"
lambda_over_omega = 100.0

[[sweep]]
axis = "p"
start = 0.0
stop = 1.0
steps = 41

[[sweep]]
axis = "gamma0"
start = 0.0
stop = 0.1
steps = 21
"#;

const FIG3: &str = r#"
outputs = ["delta_phi", "series"]

[state]
kind = "werner"

[env]
kind = "boson"
spectral = "ohmic"
lambda_over_omega = 100.0

[[sweep]]
axis = "gamma0"
values = [0.0005, 0.002, 0.01]

[[sweep]]
axis = "p"
start = 0.0
stop = 1.0
steps = 101
"#;

const FIG4: &str = r#"
outputs = ["geophase", "delta_phi"]

[state]
kind = "werner"

[env]
kind = "boson"
spectral = "supraohmic"
lambda_over_omega = 100.0

[[sweep]]
axis = "p"
start = 0.0
stop = 1.0
steps = 41

[[sweep]]
axis = "gamma0"
start = 0.0
stop = 0.1
steps = 21
"#;

const FIG5: &str = r#"
outputs = ["delta_phi", "series"]

[state]
kind = "werner"

[env]
kind = "boson"
spectral = "supraohmic"
lambda_over_omega = 100.0

[[sweep]]
axis = "gamma0"
values = [0.0005, 0.002, 0.01]

[[sweep]]
axis = "p"
start = 0.0
stop = 1.0
steps = 101
"#;

const FIG6_OHMIC: &str = r#"
outputs = ["concurrence", "entropy", "factors"]

[state]
kind = "werner"

[env]
kind = "boson"
spectral = "ohmic"
gamma0 = 0.002
lambda_over_omega = 100.0

[[sweep]]
axis = "p"
values = [0.01, 0.2, 0.5]

[[sweep]]
axis = "t"
start = 0.0
stop = 50.0
steps = 501
"#;

const FIG6_SUPRA: &str = r#"
outputs = ["concurrence", "entropy", "factors"]

[state]
kind = "werner"

[env]
kind = "boson"
spectral = "supraohmic"
gamma0 = 0.002
lambda_over_omega = 100.0

[[sweep]]
axis = "p"
values = [0.01, 0.5]

[[sweep]]
axis = "t"
start = 0.0
stop = 50.0
steps = 501
"#;

const FIG7_OHMIC: &str = r#"
outputs = ["concurrence", "entropy", "factors"]

[state]
kind = "werner"

[env]
kind = "boson"
spectral = "ohmic"
gamma0 = 0.1
lambda_over_omega = 100.0

[[sweep]]
axis = "p"
values = [0.01, 0.2, 0.5]

[[sweep]]
axis = "t"
start = 0.0
stop = 50.0
steps = 501
"#;

const FIG7_SUPRA: &str = r#"
outputs = ["concurrence", "entropy", "factors"]

[state]
kind = "werner"

[env]
kind = "boson"
spectral = "supraohmic"
gamma0 = 0.1
lambda_over_omega = 100.0

[[sweep]]
axis = "p"
values = [0.01, 0.5]

[[sweep]]
axis = "t"
start = 0.0
stop = 50.0
steps = 501
"#;

const FIG8: &str = r#"
outputs = ["geophase", "delta_phi"]

[state]
kind = "werner"

[env]
kind = "spin"

[env.bath]
kind = "homogeneous"
n_spins = 100
h_over_omega = 1.0
eps_over_lambda = 1.0

[[sweep]]
axis = "p"
start = 0.0
stop = 1.0
steps = 41

[[sweep]]
axis = "lambda_over_h"
start = 0.0
stop = 0.1
steps = 11
"#;

const FIG9: &str = r#"
outputs = ["delta_phi", "series"]

[state]
kind = "werner"

[env]
kind = "spin"

[env.bath]
kind = "homogeneous"
n_spins = 100
h_over_omega = 1.0
eps_over_lambda = 1.0

[[sweep]]
axis = "p"
values = [0.1, 0.25, 0.4]

[[sweep]]
axis = "lambda_over_h"
start = 0.0
stop = 0.1
steps = 51
"#;

const FIG10_N10: &str = r#"
outputs = ["concurrence", "factors"]

[state]
kind = "werner"

[env]
kind = "spin"

[env.bath]
kind = "homogeneous"
n_spins = 10
h_over_omega = 1.0
eps_over_lambda = 1.0

[[sweep]]
axis = "lambda_over_h"
values = [0.1, 0.5]

[[sweep]]
axis = "p"
values = [0.01, 0.1, 0.45]

[[sweep]]
axis = "t"
start = 0.0
stop = 30.0
steps = 601
"#;

const FIG10_N100: &str = r#"
outputs = ["concurrence", "factors"]

[state]
kind = "werner"
p = 0.01

[env]
kind = "spin"

[env.bath]
kind = "homogeneous"
n_spins = 100
h_over_omega = 1.0
lambda_over_h = 0.1
eps_over_lambda = 1.0

[[sweep]]
axis = "t"
start = 0.0
stop = 30.0
steps = 601
"#;

const FIG11_N10: &str = r#"
outputs = ["concurrence", "entropy"]

[state]
kind = "werner"

[env]
kind = "spin"

[env.bath]
kind = "homogeneous"
n_spins = 10
h_over_omega = 1.0
lambda_over_h = 0.1
eps_over_lambda = 1.0

[[sweep]]
axis = "p"
values = [0.1, 0.45]

[[sweep]]
axis = "t"
start = 0.0
stop = 30.0
steps = 601
"#;

const FIG11_N100: &str = r#"
outputs = ["concurrence", "entropy"]

[state]
kind = "werner"
p = 0.1

[env]
kind = "spin"

[env.bath]
kind = "homogeneous"
n_spins = 100
h_over_omega = 1.0
lambda_over_h = 0.1
eps_over_lambda = 1.0

[[sweep]]
axis = "t"
start = 0.0
stop = 30.0
steps = 601
"#;
