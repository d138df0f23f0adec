//! Deterministic transcript rendering.
//!
//! Transcripts feed the task prompts: system event lines are generated in
//! English from the structured events, player utterances are reproduced in
//! their primary language, and the visibility flags of each task (traces,
//! role disclosure, final roles, perspective, anonymization, cutoff) are all
//! realized here.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{self, MissionResult, PlayerId, Role, PLAYER_COUNT};
use crate::session::{AnnotatedText, GameEvent, ProposalStage, Session, Speaker};

/// A bijection on the six seats, used to anonymize player identities.
/// `apply` maps a true id to its displayed id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation([u8; PLAYER_COUNT]);

impl Permutation {
    pub fn identity() -> Self {
        Permutation([1, 2, 3, 4, 5, 6])
    }

    /// Seeded Fisher–Yates shuffle; the same seed always yields the same
    /// relabeling.
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ids = [1u8, 2, 3, 4, 5, 6];
        ids.shuffle(&mut rng);
        Permutation(ids)
    }

    /// Builds from an explicit mapping array (`mapping[i]` is the displayed
    /// id of true player `i + 1`). Returns `None` unless it is a bijection.
    pub fn from_mapping(mapping: [u8; PLAYER_COUNT]) -> Option<Self> {
        let mut seen = [false; PLAYER_COUNT];
        for id in mapping {
            if !(1..=PLAYER_COUNT as u8).contains(&id) || seen[id as usize - 1] {
                return None;
            }
            seen[id as usize - 1] = true;
        }
        Some(Permutation(mapping))
    }

    pub fn apply(&self, player: PlayerId) -> PlayerId {
        PlayerId::new(self.0[player.index()]).expect("permutation entries are valid ids")
    }

    pub fn invert(&self) -> Permutation {
        let mut inv = [0u8; PLAYER_COUNT];
        for (i, displayed) in self.0.iter().enumerate() {
            inv[*displayed as usize - 1] = i as u8 + 1;
        }
        Permutation(inv)
    }

    pub fn mapping(&self) -> [u8; PLAYER_COUNT] {
        self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0 == [1, 2, 3, 4, 5, 6]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perspective {
    FirstPerson,
    ThirdPerson,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderOptions {
    pub perspective: Perspective,
    pub include_traces: bool,
    pub reveal_subject_role: bool,
    pub include_final_roles: bool,
    /// Renders only up to and including `(mission, round-in-mission)`.
    pub up_to: Option<(u8, u32)>,
    pub anonymize: Option<Permutation>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            perspective: Perspective::ThirdPerson,
            include_traces: true,
            reveal_subject_role: false,
            include_final_roles: false,
            up_to: None,
            anonymize: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RenderedTranscript {
    pub text: String,
    /// The relabeling applied when `anonymize` was set.
    pub permutation: Option<Permutation>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenderError {
    #[error("cutoff ({0}, {1}) is outside the session")]
    OutOfRange(u8, u32),
}

fn ids_list(ids: impl IntoIterator<Item = PlayerId>) -> String {
    let parts: Vec<String> = ids.into_iter().map(|p| p.get().to_string()).collect();
    if parts.is_empty() {
        "none".to_string()
    } else {
        parts.join(", ")
    }
}

/// Renders a session to deterministic text. Identical `(session, options)`
/// always produce byte-identical output.
pub fn render_transcript(
    session: &Session,
    opts: &RenderOptions,
) -> Result<RenderedTranscript, RenderError> {
    if let Some((m, r)) = opts.up_to {
        let ok = session
            .missions
            .iter()
            .any(|block| block.index == m && (r as usize) >= 1 && (r as usize) <= block.rounds.len());
        if !ok {
            return Err(RenderError::OutOfRange(m, r));
        }
    }
    let perm = opts.anonymize;
    let relabel = |p: PlayerId| perm.map(|pi| pi.apply(p)).unwrap_or(p);
    let mut text = String::new();

    if opts.reveal_subject_role {
        let subject = relabel(session.subject);
        let role = session.assignment.role_of(session.subject);
        let knowledge = knowledge_line(session, &relabel);
        match opts.perspective {
            Perspective::FirstPerson => {
                let _ = writeln!(text, "[My Info] I am Player {subject}. My role: {}.{knowledge}", role.name());
            }
            Perspective::ThirdPerson => {
                let _ = writeln!(
                    text,
                    "[Subject Info] The subject is Player {subject}, playing {}.{knowledge}",
                    role.name()
                );
            }
        }
        text.push('\n');
    }

    'missions: for mission in &session.missions {
        let _ = writeln!(text, "## Mission {}", mission.index);
        for (ri, round) in mission.rounds.iter().enumerate() {
            let round_no = ri as u32 + 1;
            let _ = writeln!(text, "### Round {round_no}");
            // Round shape is validated at load: the initial proposal leads,
            // speeches follow, then the remaining events in order.
            let (head, tail) = match round.events.split_first() {
                Some((h, t)) => (Some(h), t),
                None => (None, &round.events[..]),
            };
            if let Some(event) = head {
                render_event(&mut text, event, mission.index, &relabel);
            }
            for utterance in &round.utterances {
                render_utterance(&mut text, utterance, session, opts, &relabel);
            }
            for event in tail {
                render_event(&mut text, event, mission.index, &relabel);
            }
            if opts.include_traces {
                if let Some(trace) = &round.trace {
                    let rendered = annotated_for_display(trace, perm.as_ref());
                    let _ = writeln!(text, "[Strategy] {rendered}");
                }
            }
            text.push('\n');
            if opts.up_to == Some((mission.index, round_no)) {
                break 'missions;
            }
        }
    }

    if opts.include_final_roles {
        let mut entries: Vec<(PlayerId, Role)> = session
            .assignment
            .iter()
            .map(|(p, role)| (relabel(p), role))
            .collect();
        entries.sort_by_key(|(p, _)| *p);
        let body: Vec<String> = entries
            .iter()
            .map(|(p, role)| format!("Player {p}: {}", role.name()))
            .collect();
        let _ = writeln!(text, "[Final Roles] {}.", body.join("; "));
    }

    Ok(RenderedTranscript {
        text,
        permutation: perm,
    })
}

fn knowledge_line(session: &Session, relabel: &dyn Fn(PlayerId) -> PlayerId) -> String {
    let info = game::visible_info(&session.assignment, session.subject);
    if info.is_empty() {
        return String::new();
    }
    let role = session.assignment.role_of(session.subject);
    let ids: Vec<PlayerId> = info.iter().map(|(p, _)| relabel(*p)).collect();
    match role {
        Role::Merlin => format!(" Players {} are evil.", ids_list(ids)),
        Role::Percival => format!(
            " Players {} are Merlin and Morgana, in unknown order.",
            ids_list(ids)
        ),
        Role::Morgana => format!(" Teammate Assassin is Player {}.", ids[0]),
        Role::Assassin => format!(" Teammate Morgana is Player {}.", ids[0]),
        Role::LoyalServant => String::new(),
    }
}

fn render_event(
    out: &mut String,
    event: &GameEvent,
    mission_index: u8,
    relabel: &dyn Fn(PlayerId) -> PlayerId,
) {
    match event {
        GameEvent::Proposal {
            stage,
            leader,
            team,
        } => {
            let leader = relabel(*leader);
            let mut ids: Vec<PlayerId> = team.iter().map(|p| relabel(*p)).collect();
            ids.sort();
            match stage {
                ProposalStage::Initial => {
                    let _ = writeln!(
                        out,
                        "[System] Player {leader} is the leader. Initial team proposal: {}.",
                        ids_list(ids)
                    );
                }
                ProposalStage::Final => {
                    let _ = writeln!(
                        out,
                        "[System] Player {leader} is the leader. Final team: {}.",
                        ids_list(ids)
                    );
                }
            }
        }
        GameEvent::TeamVote {
            approve,
            reject,
            approved,
        } => {
            let mut approve: Vec<PlayerId> = approve.iter().map(|p| relabel(*p)).collect();
            let mut reject: Vec<PlayerId> = reject.iter().map(|p| relabel(*p)).collect();
            approve.sort();
            reject.sort();
            let verdict = if *approved { "succeeds" } else { "fails" };
            let _ = writeln!(
                out,
                "[System] Approve: {}; Reject: {}. Team formation {verdict}.",
                ids_list(approve),
                ids_list(reject)
            );
        }
        GameEvent::MissionTally {
            good_votes,
            bad_votes,
            result,
        } => {
            let verdict = match result {
                MissionResult::Success => "succeeded",
                MissionResult::Fail => "failed",
            };
            let _ = writeln!(
                out,
                "[System] Mission {mission_index} {verdict} with {good_votes} good votes and {bad_votes} bad votes."
            );
        }
        GameEvent::ProposalExpired { leader } => {
            let leader = relabel(*leader);
            let _ = writeln!(
                out,
                "[System] Player {leader} did not confirm a team in time. Leadership passes."
            );
        }
        GameEvent::Assassination { target, early } => {
            let target = relabel(*target);
            if *early {
                let _ = writeln!(out, "[System] The evil side knifes early, targeting Player {target}.");
            } else {
                let _ = writeln!(out, "[System] The assassin targets Player {target}.");
            }
        }
    }
}

fn render_utterance(
    out: &mut String,
    utterance: &crate::session::Utterance,
    session: &Session,
    opts: &RenderOptions,
    relabel: &dyn Fn(PlayerId) -> PlayerId,
) {
    let body = if opts.anonymize.is_some() {
        relabel_utterance_text(&utterance.text_primary, relabel)
    } else {
        utterance.text_primary.clone()
    };
    match utterance.speaker {
        Speaker::System => {
            let _ = writeln!(out, "[System] {body}");
        }
        Speaker::Player(p) => {
            if opts.perspective == Perspective::FirstPerson && p == session.subject {
                let _ = writeln!(out, "[Me] {body}");
            } else {
                let _ = writeln!(out, "[Player {}] {body}", relabel(p));
            }
        }
    }
}

/// Relabels the unambiguous textual reference forms (`N号`, `Player N`)
/// inside free utterance text. Bare digit clusters have no reliable span
/// information in utterances and are left untouched.
fn relabel_utterance_text(text: &str, relabel: &dyn Fn(PlayerId) -> PlayerId) -> String {
    let spans = super::mask::extract_mentions(text);
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::new();
    let mut cursor = 0usize;
    for span in spans {
        out.extend(&chars[cursor..span.start]);
        for p in &span.players {
            out.push_str(&relabel(*p).get().to_string());
        }
        cursor = span.end;
    }
    out.extend(&chars[cursor..]);
    out
}

/// Renders annotated text, rewriting mention spans through the permutation
/// when one is given. The rewritten span is the ascending digit rendering of
/// the permuted player set.
pub fn annotated_for_display(text: &AnnotatedText, perm: Option<&Permutation>) -> String {
    let Some(perm) = perm else {
        return text.text_primary.clone();
    };
    let chars: Vec<char> = text.text_primary.chars().collect();
    let mut out = String::new();
    let mut cursor = 0usize;
    for span in &text.mentions {
        out.extend(&chars[cursor..span.start]);
        let mut mapped: Vec<u8> = span.players.iter().map(|p| perm.apply(*p).get()).collect();
        mapped.sort();
        for d in mapped {
            out.push_str(&d.to_string());
        }
        cursor = span.end;
    }
    out.extend(&chars[cursor..]);
    out
}
