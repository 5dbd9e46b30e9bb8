use std::process::Command;

use serde::{Deserialize, Serialize};

use crate::ledger::{Action, MacAddr};

use super::backend::{ActuatorBackend, BackendError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandStep {
    AddRule,
    SetTarget,
    SetProto,
    SetSrc,
    SetSrcMac,
    CommitReload,
    DeleteRule,
}

const ALLOW_SEQUENCE: [CommandStep; 6] = [
    CommandStep::AddRule,
    CommandStep::SetTarget,
    CommandStep::SetProto,
    CommandStep::SetSrc,
    CommandStep::SetSrcMac,
    CommandStep::CommitReload,
];

const DENY_SEQUENCE: [CommandStep; 2] = [CommandStep::DeleteRule, CommandStep::CommitReload];

/// Shell command templates for an OpenWRT-style firewall.
///
/// `{mac}` expands to the canonical address, `{mac_key}` to the same address
/// with separators stripped (usable inside uci section names).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommandTemplates {
    pub add_rule: String,
    pub set_target: String,
    pub set_proto: String,
    pub set_src: String,
    pub set_src_mac: String,
    pub commit_reload: String,
    pub delete_rule: String,
}

impl Default for CommandTemplates {
    fn default() -> Self {
        CommandTemplates {
            add_rule: "uci set firewall.redes_{mac_key}=rule".into(),
            set_target: "uci set firewall.redes_{mac_key}.target=ACCEPT".into(),
            set_proto: "uci set firewall.redes_{mac_key}.proto='tcp udp icmp'".into(),
            set_src: "uci set firewall.redes_{mac_key}.src=lan".into(),
            set_src_mac: "uci set firewall.redes_{mac_key}.src_mac={mac}".into(),
            commit_reload: "uci commit firewall && /etc/init.d/firewall reload".into(),
            delete_rule: "uci -q delete firewall.redes_{mac_key}".into(),
        }
    }
}

impl CommandTemplates {
    pub fn template(&self, step: CommandStep) -> &str {
        match step {
            CommandStep::AddRule => &self.add_rule,
            CommandStep::SetTarget => &self.set_target,
            CommandStep::SetProto => &self.set_proto,
            CommandStep::SetSrc => &self.set_src,
            CommandStep::SetSrcMac => &self.set_src_mac,
            CommandStep::CommitReload => &self.commit_reload,
            CommandStep::DeleteRule => &self.delete_rule,
        }
    }

    pub fn render(&self, step: CommandStep, mac: MacAddr) -> String {
        let canonical = mac.to_string();
        self.template(step)
            .replace("{mac_key}", &canonical.replace(':', ""))
            .replace("{mac}", &canonical)
    }
}

/// Executes one rendered command line and reports its exit status.
pub trait ProcessRunner {
    fn run(&mut self, command: &str) -> std::io::Result<Option<i32>>;
}

/// Runs commands through `sh -c`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ShellRunner;

impl ProcessRunner for ShellRunner {
    fn run(&mut self, command: &str) -> std::io::Result<Option<i32>> {
        Ok(Command::new("sh").arg("-c").arg(command).status()?.code())
    }
}

/// Backend that drives a firewall by rendering and running command templates.
#[derive(Debug, Clone)]
pub struct CommandBackend<R> {
    templates: CommandTemplates,
    runner: R,
}

impl<R: ProcessRunner> CommandBackend<R> {
    pub fn new(templates: CommandTemplates, runner: R) -> Self {
        CommandBackend { templates, runner }
    }

    pub fn runner(&self) -> &R {
        &self.runner
    }

    fn run_sequence(&mut self, steps: &[CommandStep], mac: MacAddr) -> Result<(), BackendError> {
        for (i, &step) in steps.iter().enumerate() {
            let command = self.templates.render(step, mac);
            match self.runner.run(&command) {
                Ok(Some(0)) => {}
                Ok(status) => {
                    return Err(BackendError::CommandFailed { step: i + 1, name: step, command, status })
                }
                Err(e) => return Err(BackendError::Spawn { command, message: e.to_string() }),
            }
        }
        Ok(())
    }
}

impl<R: ProcessRunner> ActuatorBackend for CommandBackend<R> {
    fn apply(&mut self, mac: MacAddr, action: Action) -> Result<(), BackendError> {
        match action {
            Action::Allow => self.run_sequence(&ALLOW_SEQUENCE, mac),
            Action::Deny => self.run_sequence(&DENY_SEQUENCE, mac),
        }
    }

    fn revoke(&mut self, mac: MacAddr) -> Result<(), BackendError> {
        self.run_sequence(&DENY_SEQUENCE, mac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Records commands; fails with status 1 on the given invocation number.
    #[derive(Default)]
    struct StubRunner {
        seen: Vec<String>,
        fail_on: Option<usize>,
    }

    impl ProcessRunner for StubRunner {
        fn run(&mut self, command: &str) -> std::io::Result<Option<i32>> {
            self.seen.push(command.to_string());
            Ok(Some(if self.fail_on == Some(self.seen.len()) { 1 } else { 0 }))
        }
    }

    fn echo_templates() -> CommandTemplates {
        CommandTemplates {
            add_rule: "echo add {mac}".into(),
            set_target: "echo target {mac}".into(),
            set_proto: "echo proto {mac}".into(),
            set_src: "echo src {mac}".into(),
            set_src_mac: "echo src_mac {mac}".into(),
            commit_reload: "echo commit".into(),
            delete_rule: "echo delete {mac_key}".into(),
        }
    }

    fn mac() -> MacAddr {
        "aa:bb:cc:dd:ee:ff".parse().unwrap()
    }

    #[test]
    fn allow_runs_six_steps_in_order() {
        let mut backend = CommandBackend::new(echo_templates(), StubRunner::default());
        backend.apply(mac(), Action::Allow).unwrap();
        assert_eq!(
            backend.runner().seen,
            [
                "echo add aa:bb:cc:dd:ee:ff",
                "echo target aa:bb:cc:dd:ee:ff",
                "echo proto aa:bb:cc:dd:ee:ff",
                "echo src aa:bb:cc:dd:ee:ff",
                "echo src_mac aa:bb:cc:dd:ee:ff",
                "echo commit",
            ]
        );
    }

    #[test]
    fn deny_and_revoke_delete_then_commit() {
        let mut backend = CommandBackend::new(echo_templates(), StubRunner::default());
        backend.apply(mac(), Action::Deny).unwrap();
        backend.revoke(mac()).unwrap();
        assert_eq!(
            backend.runner().seen,
            ["echo delete aabbccddeeff", "echo commit", "echo delete aabbccddeeff", "echo commit"]
        );
    }

    #[test]
    fn failure_names_the_step() {
        let runner = StubRunner { fail_on: Some(3), ..Default::default() };
        let mut backend = CommandBackend::new(echo_templates(), runner);
        let err = backend.apply(mac(), Action::Allow).unwrap_err();
        assert_eq!(
            err,
            BackendError::CommandFailed {
                step: 3,
                name: CommandStep::SetProto,
                command: "echo proto aa:bb:cc:dd:ee:ff".into(),
                status: Some(1),
            }
        );
        assert_eq!(backend.runner().seen.len(), 3);
    }

    #[test]
    fn default_templates_keep_rule_parameters() {
        let t = CommandTemplates::default();
        assert!(t.render(CommandStep::SetProto, mac()).contains("tcp udp icmp"));
        assert!(t.render(CommandStep::SetSrc, mac()).ends_with("src=lan"));
        assert!(t.render(CommandStep::SetSrcMac, mac()).ends_with("src_mac=aa:bb:cc:dd:ee:ff"));
    }

    #[test]
    fn shell_runner_reports_status() {
        let mut backend = CommandBackend::new(
            CommandTemplates { set_src: "exit 4".into(), ..echo_templates() },
            ShellRunner,
        );
        let err = backend.apply(mac(), Action::Allow).unwrap_err();
        assert!(matches!(err, BackendError::CommandFailed { step: 4, status: Some(4), .. }));
    }
}
