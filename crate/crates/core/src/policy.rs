//! Rule-based mapping from (context verdict, requested action) to the
//! number of authentication factors required.
//!
//! | context                         | action  | level |
//! |---------------------------------|---------|-------|
//! | in working hours and on site    | default | Low   |
//! | in working hours and on site    | root    | High  |
//! | outside working hours or off site | default | High  |
//! | outside working hours or off site | root    | High  |

use crate::context::ContextVerdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RequestedAction {
    DefaultAccess,
    RootAccess,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SecurityLevel {
    /// One factor.
    Low,
    /// Two factors.
    High,
}

impl SecurityLevel {
    pub fn required_factors(self) -> u8 {
        match self {
            SecurityLevel::Low => 1,
            SecurityLevel::High => 2,
        }
    }
}

pub fn required_security(verdict: &ContextVerdict, action: RequestedAction) -> SecurityLevel {
    match (verdict.is_plausible(), action) {
        (true, RequestedAction::DefaultAccess) => SecurityLevel::Low,
        (true, RequestedAction::RootAccess) => SecurityLevel::High,
        (false, _) => SecurityLevel::High,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::ContextReason;

    fn implausible() -> ContextVerdict {
        ContextVerdict::from_reasons([ContextReason::OffSite])
    }

    #[test]
    fn matrix() {
        use RequestedAction::*;
        assert_eq!(
            required_security(&ContextVerdict::plausible(), DefaultAccess),
            SecurityLevel::Low
        );
        assert_eq!(
            required_security(&ContextVerdict::plausible(), RootAccess),
            SecurityLevel::High
        );
        assert_eq!(
            required_security(&implausible(), DefaultAccess),
            SecurityLevel::High
        );
        assert_eq!(
            required_security(&implausible(), RootAccess),
            SecurityLevel::High
        );
    }

    #[test]
    fn risk_monotone_and_root_dominant() {
        let verdicts = [
            ContextVerdict::plausible(),
            ContextVerdict::from_reasons([ContextReason::OutsideWorkingHours]),
            ContextVerdict::from_reasons([ContextReason::OffSite]),
            ContextVerdict::from_reasons([
                ContextReason::OutsideWorkingHours,
                ContextReason::OffSite,
            ]),
        ];
        for action in [RequestedAction::DefaultAccess, RequestedAction::RootAccess] {
            for v in &verdicts {
                assert!(required_security(v, action) >= required_security(&verdicts[0], action));
            }
        }
        for v in &verdicts {
            assert_eq!(
                required_security(v, RequestedAction::RootAccess),
                SecurityLevel::High
            );
        }
    }

    #[test]
    fn factor_counts() {
        assert_eq!(SecurityLevel::Low.required_factors(), 1);
        assert_eq!(SecurityLevel::High.required_factors(), 2);
    }
}
