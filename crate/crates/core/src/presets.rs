//! Figure configurations shipped with the crate.

use crate::config::{parse_config, Config};
use crate::error::{Error, Result};

pub const PRESETS: [(&str, &str); 7] = [
    ("fig2", include_str!("../../../configs/fig2.cfg")),
    ("fig3", include_str!("../../../configs/fig3.cfg")),
    ("fig4", include_str!("../../../configs/fig4.cfg")),
    ("fig5", include_str!("../../../configs/fig5.cfg")),
    ("fig6", include_str!("../../../configs/fig6.cfg")),
    ("fig7", include_str!("../../../configs/fig7.cfg")),
    ("fig8", include_str!("../../../configs/fig8.cfg")),
];

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn preset(name: &str) -> Result<Config> {
    let text = preset_text(name).ok_or_else(|| Error::Config {
        path: name.to_string(),
        message: "no such preset".into(),
    })?;
    parse_config(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_parse() {
        for (name, _) in PRESETS {
            let c = preset(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(c.sweep.is_some(), "{name}");
        }
    }
}
