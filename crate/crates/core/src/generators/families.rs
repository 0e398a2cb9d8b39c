//! The small synthetic families and the two running example nets.

use std::fmt;
use std::str::FromStr;

use crate::error::NetError;
use crate::net::{Net, NetSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// k-sound for k < c, c-unsound.
    Nc,
    /// Quasi-sound and ℓc-sound.
    Sound,
    /// Not structurally quasi-sound.
    NQuasi,
    /// ℓc-quasi-sound but not structurally sound.
    NSound,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Nc, Family::Sound, Family::NQuasi, Family::NSound];

    pub fn name(self) -> &'static str {
        match self {
            Family::Nc => "nc",
            Family::Sound => "sound",
            Family::NQuasi => "nquasi",
            Family::NSound => "nsound",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family `{s}`"))
    }
}

pub fn gen_family(family: Family, c: u64) -> Result<Net, NetError> {
    if c == 0 {
        return Err(NetError::Invalid("family parameter c must be at least 1".into()));
    }
    let name = format!("{family}-{c}");
    let spec = match family {
        Family::Nc => NetSpec::new(name)
            .with_places(&["i", "p", "r", "f"])
            .with_transition("t_i", &[("i", 1)], &[("p", c + 1)])
            .with_transition("t_r", &[("p", c)], &[("r", 1)])
            .with_transition("t_f", &[("p", 1), ("r", 1)], &[("f", 1)]),
        Family::Sound => NetSpec::new(name)
            .with_places(&["i", "f"])
            .with_transition("t", &[("i", c)], &[("f", c)]),
        Family::NQuasi => {
            if c == 1 {
                return Err(NetError::Invalid(
                    "nquasi needs c >= 2: with c = 1 the transition has an empty postset".into(),
                ));
            }
            NetSpec::new(name)
                .with_places(&["i", "f"])
                .with_transition("t", &[("i", c)], &[("f", c - 1)])
        }
        Family::NSound => NetSpec::new(name)
            .with_places(&["i", "u", "d", "f"])
            .with_transition("t_i", &[("i", 1)], &[("u", 1), ("d", 1)])
            .with_transition("t_u", &[("u", c), ("d", 1)], &[("f", 1)])
            .with_transition("t_d", &[("d", 2)], &[("d", 1), ("f", 1)]),
    };
    spec.with_initial("i").with_final("f").build()
}

/// Fork into two concurrent branches and join. Generalised sound, free-choice.
pub fn fork_join() -> Net {
    NetSpec::new("fork-join")
        .with_places(&["i", "p1", "p2", "q1", "q2", "f"])
        .with_transition("s", &[("i", 1)], &[("p1", 1), ("p2", 1)])
        .with_transition("t1", &[("p1", 1)], &[("q1", 1)])
        .with_transition("t2", &[("p2", 1)], &[("q2", 1)])
        .with_transition("u", &[("q1", 1), ("q2", 1)], &[("f", 1)])
        .with_initial("i")
        .with_final("f")
        .build()
        .expect("static net")
}

/// Token redistribution between p2 and p3; 2-sound but not 1-sound, not free-choice.
pub fn redistribution() -> Net {
    NetSpec::new("redistribution")
        .with_places(&["i", "p1", "p2", "p3", "p4", "f"])
        .with_transition("t1", &[("i", 1)], &[("p1", 1)])
        .with_transition("t2", &[("p1", 1)], &[("p2", 1)])
        .with_transition("t3", &[("p1", 1)], &[("p3", 1)])
        .with_transition("t2r", &[("p2", 1)], &[("p1", 1)])
        .with_transition("t3r", &[("p3", 1)], &[("p1", 1)])
        .with_transition("t", &[("p2", 1), ("p3", 1)], &[("f", 1), ("p4", 1)])
        .with_transition("t5", &[("p4", 1)], &[("f", 1)])
        .with_initial("i")
        .with_final("f")
        .build()
        .expect("static net")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{oracle_k_sound, KSound, DEFAULT_CAP};
    use crate::workflow::{is_free_choice, validate_workflow};

    #[test]
    fn all_families_are_workflow_nets() {
        for family in Family::ALL {
            for c in 2..8 {
                let net = gen_family(family, c).unwrap();
                assert!(validate_workflow(&net).is_ok(), "{family}-{c}");
            }
        }
        assert!(validate_workflow(&gen_family(Family::Sound, 1).unwrap()).is_ok());
        assert!(gen_family(Family::NQuasi, 1).is_err());
        assert!(gen_family(Family::Nc, 0).is_err());
    }

    #[test]
    fn nc_is_not_free_choice() {
        for c in 1..6 {
            assert!(!is_free_choice(&gen_family(Family::Nc, c).unwrap()));
        }
    }

    #[test]
    fn right_net_soundness() {
        let net = redistribution();
        assert!(matches!(oracle_k_sound(&net, 1, DEFAULT_CAP), KSound::Unsound(_)));
        assert_eq!(oracle_k_sound(&net, 2, DEFAULT_CAP), KSound::Sound);
    }

    #[test]
    fn family_names_parse() {
        for family in Family::ALL {
            assert_eq!(family.name().parse::<Family>().unwrap(), family);
        }
    }
}
