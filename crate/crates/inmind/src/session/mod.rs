//! Annotated game sessions: the structured tuple of role assignment, per-round
//! events, strategy traces, and the post-game reflection, together with the
//! JSON schema, validation, and engine replay.
//!
//! A session file is a UTF-8 JSON document with top-level keys `mode`,
//! `subject`, `observed_player`, `assignment`, `missions`, `reflection`, and
//! `outcome`. Loading validates the schema (field-level paths), the
//! structural invariants, and finally replays all embedded game events
//! through the rules engine; any disagreement between recorded outcomes and
//! the engine is a consistency error.

pub mod mask;
pub mod transcript;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{
    self, GameOutcome, MissionResult, MissionVote, Phase, PlayerId, RoleAssignment,
};

pub use mask::{extract_mentions, mask_text, unmask, MaskError, MaskedText};
pub use transcript::{
    render_transcript, Permutation, Perspective, RenderError, RenderOptions, RenderedTranscript,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionMode {
    Observer,
    Participant,
}

/// Who produced an utterance: a seat at the table or the game system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Speaker {
    Player(PlayerId),
    System,
}

impl Serialize for Speaker {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Speaker::Player(p) => serializer.serialize_u8(p.get()),
            Speaker::System => serializer.serialize_str("system"),
        }
    }
}

impl<'de> Deserialize<'de> for Speaker {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let value = serde_json::Value::deserialize(deserializer)?;
        match &value {
            serde_json::Value::String(s) if s == "system" => Ok(Speaker::System),
            serde_json::Value::Number(n) => {
                let id = n
                    .as_u64()
                    .and_then(|v| u8::try_from(v).ok())
                    .ok_or_else(|| D::Error::custom("speaker id out of range"))?;
                PlayerId::new(id)
                    .map(Speaker::Player)
                    .map_err(|e| D::Error::custom(e.to_string()))
            }
            _ => Err(D::Error::custom(
                "speaker must be a player number or \"system\"",
            )),
        }
    }
}

impl fmt::Display for Speaker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Speaker::Player(p) => write!(f, "Player {p}"),
            Speaker::System => write!(f, "System"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker: Speaker,
    pub text_primary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_translation: Option<String>,
}

/// A span of `text_primary`, in character offsets, that refers to one or
/// more players. Compound references like a digit cluster `126` carry the
/// whole player set on a single span.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionSpan {
    pub start: usize,
    pub end: usize,
    pub players: Vec<PlayerId>,
}

/// Free text with explicit player-mention annotations (strategy traces and
/// reflective summaries).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedText {
    pub text_primary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_translation: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mentions: Vec<MentionSpan>,
}

impl AnnotatedText {
    pub fn plain(text: impl Into<String>) -> Self {
        AnnotatedText {
            text_primary: text.into(),
            text_translation: None,
            mentions: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProposalStage {
    Initial,
    Final,
}

/// Observable game-state records within a round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GameEvent {
    Proposal {
        stage: ProposalStage,
        leader: PlayerId,
        team: BTreeSet<PlayerId>,
    },
    TeamVote {
        approve: BTreeSet<PlayerId>,
        reject: BTreeSet<PlayerId>,
        approved: bool,
    },
    MissionTally {
        good_votes: u32,
        bad_votes: u32,
        result: MissionResult,
    },
    ProposalExpired {
        leader: PlayerId,
    },
    Assassination {
        target: PlayerId,
        early: bool,
    },
}

/// One proposal round: what was said, what happened, and the subject's
/// strategy trace for the round (if any).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundEvents {
    #[serde(default)]
    pub utterances: Vec<Utterance>,
    #[serde(default)]
    pub events: Vec<GameEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<AnnotatedText>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissionTally {
    pub good_votes: u32,
    pub bad_votes: u32,
}

impl MissionTally {
    pub fn result(&self) -> MissionResult {
        if self.bad_votes > 0 {
            MissionResult::Fail
        } else {
            MissionResult::Success
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissionBlock {
    pub index: u8,
    pub rounds: Vec<RoundEvents>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<MissionTally>,
}

/// One annotated game session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub mode: SessionMode,
    pub subject: PlayerId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed_player: Option<PlayerId>,
    pub assignment: RoleAssignment,
    pub missions: Vec<MissionBlock>,
    pub reflection: AnnotatedText,
    pub outcome: GameOutcome,
}

/// A flattened view of one proposal round with its position in the session.
#[derive(Debug, Clone, Copy)]
pub struct RoundRef<'a> {
    /// 1-based mission index.
    pub mission_index: u8,
    /// 1-based round number within the mission.
    pub round_in_mission: u32,
    /// 1-based ordinal over the whole session's round sequence.
    pub flat_index: u32,
    pub round: &'a RoundEvents,
}

impl Session {
    /// All proposal rounds in play order.
    pub fn flattened_rounds(&self) -> Vec<RoundRef<'_>> {
        let mut out = Vec::new();
        let mut flat = 0;
        for mission in &self.missions {
            for (i, round) in mission.rounds.iter().enumerate() {
                flat += 1;
                out.push(RoundRef {
                    mission_index: mission.index,
                    round_in_mission: i as u32 + 1,
                    flat_index: flat,
                    round,
                });
            }
        }
        out
    }

    /// Rounds that carry a strategy trace, in play order.
    pub fn traced_rounds(&self) -> Vec<RoundRef<'_>> {
        self.flattened_rounds()
            .into_iter()
            .filter(|r| r.round.trace.is_some())
            .collect()
    }

    /// Primary-language utterance texts spoken by `player`.
    pub fn utterances_of(&self, player: PlayerId) -> Vec<&str> {
        self.flattened_rounds()
            .iter()
            .flat_map(|r| r.round.utterances.iter())
            .filter(|u| u.speaker == Speaker::Player(player))
            .map(|u| u.text_primary.as_str())
            .collect()
    }

    /// Number of player (non-system) utterances in the session.
    pub fn player_turn_count(&self) -> usize {
        self.flattened_rounds()
            .iter()
            .flat_map(|r| r.round.utterances.iter())
            .filter(|u| matches!(u.speaker, Speaker::Player(_)))
            .count()
    }

    pub fn trace_count(&self) -> usize {
        self.traced_rounds().len()
    }

    /// Splits the reflection into per-sentence segments that contain at
    /// least one mention; offsets are rebased to the segment. These segments
    /// are the unit of the reflection-alignment task.
    pub fn reflection_segments(&self) -> Vec<AnnotatedText> {
        segment_annotated(&self.reflection)
    }

    /// Replays every embedded game event through the rules engine and checks
    /// each recorded claim on the way. Returns the engine's final outcome.
    pub fn replay(&self) -> Result<GameOutcome, ConsistencyIssue> {
        replay_session(self)
    }

    /// Canonical serialized form: pretty-printed UTF-8 JSON with struct key
    /// order and a trailing newline. Loading then re-serializing is
    /// byte-identical.
    pub fn to_canonical_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("session serialization");
        text.push('\n');
        text
    }
}

/// Splits annotated text into sentence segments keeping only those with at
/// least one mention. Sentences end at `。`, `！`, `？`, `!`, `?`, or `.`
/// followed by whitespace/end; the delimiter stays with the sentence.
pub fn segment_annotated(text: &AnnotatedText) -> Vec<AnnotatedText> {
    let chars: Vec<char> = text.text_primary.chars().collect();
    let mut boundaries = Vec::new(); // exclusive char end of each sentence
    for (i, c) in chars.iter().enumerate() {
        if matches!(c, '。' | '！' | '？' | '!' | '?') {
            boundaries.push(i + 1);
        }
    }
    if boundaries.last() != Some(&chars.len()) && !chars.is_empty() {
        boundaries.push(chars.len());
    }
    let mut out = Vec::new();
    let mut start = 0usize;
    for end in boundaries {
        if end <= start {
            continue;
        }
        let seg_text: String = chars[start..end].iter().collect();
        let mentions: Vec<MentionSpan> = text
            .mentions
            .iter()
            .filter(|m| m.start >= start && m.end <= end)
            .map(|m| MentionSpan {
                start: m.start - start,
                end: m.end - start,
                players: m.players.clone(),
            })
            .collect();
        if !mentions.is_empty() {
            out.push(AnnotatedText {
                text_primary: seg_text.trim().to_string(),
                text_translation: None,
                mentions: {
                    // account for leading whitespace removed by trim
                    let lead = seg_text.chars().take_while(|c| c.is_whitespace()).count();
                    mentions
                        .into_iter()
                        .map(|m| MentionSpan {
                            start: m.start - lead,
                            end: m.end - lead,
                            players: m.players,
                        })
                        .collect()
                },
            });
        }
        start = end;
    }
    out
}

// ---------------------------------------------------------------------------
// Loading and validation
// ---------------------------------------------------------------------------

/// A single schema problem with a JSON-pointer-style path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for SchemaIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// A disagreement between recorded session data and the rules engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyIssue {
    pub location: String,
    pub message: String,
}

impl fmt::Display for ConsistencyIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("document is not valid JSON: {0}")]
    Json(String),
    #[error("schema errors: {}", format_issues(.0))]
    Schema(Vec<SchemaIssue>),
    #[error("consistency error: {0}")]
    Consistency(ConsistencyIssue),
}

fn format_issues(issues: &[SchemaIssue]) -> String {
    issues
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Parses, schema-checks, invariant-checks, and replays a session document.
pub fn load_session(bytes: &[u8]) -> Result<Session, LoadError> {
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| LoadError::Json(e.to_string()))?;
    let issues = check_document_shape(&value);
    if !issues.is_empty() {
        return Err(LoadError::Schema(issues));
    }
    let session: Session = serde_json::from_value(value).map_err(|e| {
        LoadError::Schema(vec![SchemaIssue {
            path: "/".into(),
            message: e.to_string(),
        }])
    })?;
    let issues = validate_session(&session);
    if !issues.is_empty() {
        return Err(LoadError::Schema(issues));
    }
    let replayed = session.replay().map_err(LoadError::Consistency)?;
    if replayed != session.outcome {
        return Err(LoadError::Consistency(ConsistencyIssue {
            location: "/outcome".into(),
            message: format!(
                "recorded outcome {:?}/{:?} but replay produced {:?}/{:?}",
                session.outcome.winner, session.outcome.reason, replayed.winner, replayed.reason
            ),
        }));
    }
    Ok(session)
}

/// Structural checks on the raw JSON document, producing field-level paths.
fn check_document_shape(value: &serde_json::Value) -> Vec<SchemaIssue> {
    use serde_json::Value;
    let mut issues = Vec::new();
    let Some(obj) = value.as_object() else {
        return vec![SchemaIssue {
            path: "/".into(),
            message: "top level must be an object".into(),
        }];
    };
    let require = |issues: &mut Vec<SchemaIssue>, key: &str, pred: fn(&Value) -> bool, ty: &str| {
        match obj.get(key) {
            None => issues.push(SchemaIssue {
                path: format!("/{key}"),
                message: "required field is missing".into(),
            }),
            Some(v) if !pred(v) => issues.push(SchemaIssue {
                path: format!("/{key}"),
                message: format!("expected {ty}"),
            }),
            Some(_) => {}
        }
    };
    require(&mut issues, "mode", Value::is_string, "string");
    require(&mut issues, "subject", Value::is_u64, "integer");
    require(&mut issues, "assignment", Value::is_object, "object");
    require(&mut issues, "missions", Value::is_array, "array");
    require(&mut issues, "reflection", Value::is_object, "object");
    require(&mut issues, "outcome", Value::is_object, "object");
    if let Some(missions) = obj.get("missions").and_then(Value::as_array) {
        for (mi, mission) in missions.iter().enumerate() {
            let base = format!("/missions/{mi}");
            let Some(mission) = mission.as_object() else {
                issues.push(SchemaIssue {
                    path: base,
                    message: "expected object".into(),
                });
                continue;
            };
            if !mission.get("index").map(Value::is_u64).unwrap_or(false) {
                issues.push(SchemaIssue {
                    path: format!("{base}/index"),
                    message: "required integer field".into(),
                });
            }
            match mission.get("rounds").and_then(Value::as_array) {
                None => issues.push(SchemaIssue {
                    path: format!("{base}/rounds"),
                    message: "required array field".into(),
                }),
                Some(rounds) => {
                    for (ri, round) in rounds.iter().enumerate() {
                        if !round.is_object() {
                            issues.push(SchemaIssue {
                                path: format!("{base}/rounds/{ri}"),
                                message: "expected object".into(),
                            });
                        }
                    }
                }
            }
        }
    }
    issues
}

/// Semantic invariants on a decoded session.
pub fn validate_session(session: &Session) -> Vec<SchemaIssue> {
    let mut issues = Vec::new();
    match session.mode {
        SessionMode::Observer => {
            if session.observed_player.is_none() {
                issues.push(SchemaIssue {
                    path: "/observed_player".into(),
                    message: "observer sessions must designate an observed player".into(),
                });
            }
        }
        SessionMode::Participant => {
            if session.observed_player.is_some() {
                issues.push(SchemaIssue {
                    path: "/observed_player".into(),
                    message: "participant sessions must not set observed_player".into(),
                });
            }
        }
    }
    for (mi, mission) in session.missions.iter().enumerate() {
        let base = format!("/missions/{mi}");
        if mission.index as usize != mi + 1 {
            issues.push(SchemaIssue {
                path: format!("{base}/index"),
                message: format!("expected mission index {}, got {}", mi + 1, mission.index),
            });
        }
        let mut approved_rounds = 0;
        for (ri, round) in mission.rounds.iter().enumerate() {
            let rbase = format!("{base}/rounds/{ri}");
            for (ui, utterance) in round.utterances.iter().enumerate() {
                if utterance.text_primary.is_empty() {
                    issues.push(SchemaIssue {
                        path: format!("{rbase}/utterances/{ui}/text_primary"),
                        message: "utterance text must be non-empty".into(),
                    });
                }
            }
            if let Some(trace) = &round.trace {
                check_annotated(trace, &format!("{rbase}/trace"), &mut issues);
            }
            check_round_events(round, &rbase, &mut issues);
            if round
                .events
                .iter()
                .any(|e| matches!(e, GameEvent::TeamVote { approved: true, .. }))
            {
                approved_rounds += 1;
            }
        }
        if approved_rounds > 1 {
            issues.push(SchemaIssue {
                path: format!("{base}/rounds"),
                message: "at most one approved proposal per mission".into(),
            });
        }
        if (approved_rounds == 1) != mission.result.is_some() {
            issues.push(SchemaIssue {
                path: format!("{base}/result"),
                message: "mission result must be present exactly when a proposal was approved"
                    .into(),
            });
        }
    }
    check_annotated(&session.reflection, "/reflection", &mut issues);
    issues
}

fn check_annotated(text: &AnnotatedText, path: &str, issues: &mut Vec<SchemaIssue>) {
    let char_len = text.text_primary.chars().count();
    let mut prev_end = 0usize;
    for (i, span) in text.mentions.iter().enumerate() {
        let base = format!("{path}/mentions/{i}");
        if span.start >= span.end || span.end > char_len {
            issues.push(SchemaIssue {
                path: base.clone(),
                message: format!(
                    "span {}..{} out of bounds for text of {char_len} chars",
                    span.start, span.end
                ),
            });
            continue;
        }
        if span.start < prev_end {
            issues.push(SchemaIssue {
                path: base.clone(),
                message: "spans must be ordered by start offset and non-overlapping".into(),
            });
        }
        prev_end = span.end;
        if span.players.is_empty() {
            issues.push(SchemaIssue {
                path: format!("{base}/players"),
                message: "player set must be non-empty".into(),
            });
        }
        if !span.players.windows(2).all(|w| w[0] < w[1]) {
            issues.push(SchemaIssue {
                path: format!("{base}/players"),
                message: "player set must be strictly ascending".into(),
            });
        }
    }
}

/// Checks the event shape of one round: an initial proposal, then either an
/// expiry or a final proposal followed by the team vote, with an optional
/// mission tally after an approved vote and an optional trailing
/// assassination record.
fn check_round_events(round: &RoundEvents, path: &str, issues: &mut Vec<SchemaIssue>) {
    let mut push = |msg: String| {
        issues.push(SchemaIssue {
            path: format!("{path}/events"),
            message: msg,
        })
    };
    let events = &round.events;
    let mut idx = 0;
    match events.first() {
        Some(GameEvent::Proposal {
            stage: ProposalStage::Initial,
            ..
        }) => idx = 1,
        _ => {
            push("round must open with an initial proposal".into());
            return;
        }
    }
    match events.get(idx) {
        Some(GameEvent::ProposalExpired { .. }) => {
            idx += 1;
        }
        Some(GameEvent::Proposal {
            stage: ProposalStage::Final,
            ..
        }) => {
            idx += 1;
            match events.get(idx) {
                Some(GameEvent::TeamVote {
                    approve,
                    reject,
                    approved,
                }) => {
                    let mut all: BTreeSet<PlayerId> = approve.clone();
                    all.extend(reject.iter().copied());
                    if approve.intersection(reject).next().is_some() {
                        push("approve and reject sets overlap".into());
                    }
                    if all.len() != game::PLAYER_COUNT {
                        push("team vote must cover all six players".into());
                    }
                    idx += 1;
                    if *approved {
                        if let Some(GameEvent::MissionTally { .. }) = events.get(idx) {
                            idx += 1;
                        } else {
                            push("approved vote must be followed by a mission tally".into());
                        }
                    }
                }
                _ => push("final proposal must be followed by a team vote".into()),
            }
        }
        _ => push("initial proposal must be followed by a final proposal or an expiry".into()),
    }
    if let Some(GameEvent::Assassination { .. }) = events.get(idx) {
        idx += 1;
    }
    if idx != events.len() {
        push(format!(
            "unexpected trailing events (consumed {idx}, have {})",
            events.len()
        ));
    }
}

// ---------------------------------------------------------------------------
// Engine replay
// ---------------------------------------------------------------------------

fn replay_session(session: &Session) -> Result<GameOutcome, ConsistencyIssue> {
    let err = |location: String, message: String| ConsistencyIssue { location, message };
    let first_leader = session
        .missions
        .first()
        .and_then(|m| m.rounds.first())
        .and_then(|r| {
            r.events.iter().find_map(|e| match e {
                GameEvent::Proposal { leader, .. } | GameEvent::ProposalExpired { leader } => {
                    Some(*leader)
                }
                _ => None,
            })
        })
        .ok_or_else(|| err("/missions".into(), "session has no proposals".into()))?;
    let mut state = game::new_game(session.assignment.clone(), first_leader);

    for (mi, mission) in session.missions.iter().enumerate() {
        for (ri, round) in mission.rounds.iter().enumerate() {
            let loc = format!("/missions/{mi}/rounds/{ri}");
            if state.phase() == Phase::Finished {
                return Err(err(loc, "events continue after the game ended".into()));
            }
            if state.mission_index() != mission.index {
                return Err(err(
                    loc,
                    format!(
                        "engine is at mission {}, session records mission {}",
                        state.mission_index(),
                        mission.index
                    ),
                ));
            }
            let mut pending: Option<BTreeSet<PlayerId>> = None;
            for (ei, event) in round.events.iter().enumerate() {
                let eloc = format!("{loc}/events/{ei}");
                match event {
                    GameEvent::Proposal {
                        stage,
                        leader,
                        team,
                    } => {
                        state = state.with_leader(*leader);
                        if *stage == ProposalStage::Final {
                            state = game::propose_team(&state, team)
                                .map_err(|e| err(eloc.clone(), e.to_string()))?;
                            pending = Some(team.clone());
                        } else {
                            let required = game::required_team_size(mission.index)
                                .map_err(|e| err(eloc.clone(), e.to_string()))?;
                            if team.len() != required {
                                return Err(err(
                                    eloc,
                                    format!(
                                        "initial proposal has {} members, mission needs {required}",
                                        team.len()
                                    ),
                                ));
                            }
                        }
                    }
                    GameEvent::ProposalExpired { .. } => {
                        state = game::expire_proposal(&state)
                            .map_err(|e| err(eloc.clone(), e.to_string()))?;
                    }
                    GameEvent::TeamVote {
                        approve,
                        reject: _,
                        approved,
                    } => {
                        let team = pending.clone().ok_or_else(|| {
                            err(eloc.clone(), "team vote without a final proposal".into())
                        })?;
                        state = game::apply_team_vote(&state, &team, approve)
                            .map_err(|e| err(eloc.clone(), e.to_string()))?;
                        let engine_approved = state.phase() == Phase::MissionVoting;
                        if engine_approved != *approved {
                            return Err(err(
                                eloc,
                                format!(
                                    "recorded vote outcome {} but engine computed {}",
                                    if *approved { "approved" } else { "rejected" },
                                    if engine_approved { "approved" } else { "rejected" }
                                ),
                            ));
                        }
                    }
                    GameEvent::MissionTally {
                        good_votes,
                        bad_votes,
                        result,
                    } => {
                        let team = state.current_team().cloned().ok_or_else(|| {
                            err(eloc.clone(), "mission tally without an approved team".into())
                        })?;
                        if (good_votes + bad_votes) as usize != team.len() {
                            return Err(err(
                                eloc,
                                format!(
                                    "tally counts {} votes for a team of {}",
                                    good_votes + bad_votes,
                                    team.len()
                                ),
                            ));
                        }
                        let evil_members: Vec<PlayerId> = team
                            .iter()
                            .copied()
                            .filter(|p| session.assignment.role_of(*p).is_evil())
                            .collect();
                        if *bad_votes as usize > evil_members.len() {
                            return Err(err(
                                eloc,
                                format!(
                                    "tally claims {bad_votes} fail votes but the team has only {} evil members",
                                    evil_members.len()
                                ),
                            ));
                        }
                        // Secret ballots are not recorded; reconstruct a vote
                        // set consistent with the tally.
                        let mut votes: BTreeMap<PlayerId, MissionVote> = team
                            .iter()
                            .map(|p| (*p, MissionVote::Success))
                            .collect();
                        for evil in evil_members.iter().take(*bad_votes as usize) {
                            votes.insert(*evil, MissionVote::Fail);
                        }
                        state = game::apply_mission_votes(&state, &votes)
                            .map_err(|e| err(eloc.clone(), e.to_string()))?;
                        let engine_result = *state.mission_results().last().unwrap();
                        if engine_result != *result {
                            return Err(err(
                                eloc,
                                format!(
                                    "recorded mission result {result:?} but engine computed {engine_result:?}"
                                ),
                            ));
                        }
                        let recorded = mission.result.as_ref().ok_or_else(|| {
                            err(eloc.clone(), "tally event without a mission result".into())
                        })?;
                        if recorded.good_votes != *good_votes || recorded.bad_votes != *bad_votes {
                            return Err(err(
                                eloc,
                                "mission result field disagrees with tally event".into(),
                            ));
                        }
                    }
                    GameEvent::Assassination { target, early } => {
                        state = game::assassinate(&state, *target, *early)
                            .map_err(|e| err(eloc.clone(), e.to_string()))?;
                    }
                }
            }
        }
    }
    state.outcome().ok_or_else(|| {
        err(
            "/outcome".into(),
            "recorded events do not finish the game".into(),
        )
    })
}
