//! Deterministic six-player Avalon rules engine.
//!
//! The engine is a pure state machine: every operation consumes a
//! [`GameState`] by reference and returns a new one, so states can be shared
//! freely across threads. Role assignment, asymmetric visibility, team
//! proposals, public team votes, secret mission votes, and victory resolution
//! are all modelled here; everything textual (utterances, traces) lives in
//! the session layer.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of seats at the table. Only the six-player variant is supported.
pub const PLAYER_COUNT: usize = 6;

/// Mission team sizes for missions 1 through 5.
pub const TEAM_SIZES: [usize; 5] = [2, 3, 4, 3, 4];

/// Consecutive rejected proposals that hand the game to Evil.
pub const MAX_REJECTIONS: u8 = 5;

/// A seat at the table, always in `1..=6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(u8);

impl PlayerId {
    pub fn new(id: u8) -> Result<Self, GameError> {
        if (1..=PLAYER_COUNT as u8).contains(&id) {
            Ok(PlayerId(id))
        } else {
            Err(GameError::InvalidPlayer(id))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based index for array storage.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn all() -> impl Iterator<Item = PlayerId> {
        (1..=PLAYER_COUNT as u8).map(PlayerId)
    }

    /// Next seat in ascending cyclic order (6 wraps to 1).
    pub fn next(self) -> PlayerId {
        PlayerId(self.0 % PLAYER_COUNT as u8 + 1)
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The five canonical roles of the six-player setup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Merlin,
    Percival,
    #[serde(rename = "loyal")]
    LoyalServant,
    Morgana,
    Assassin,
}

impl Role {
    pub fn alignment(self) -> Alignment {
        match self {
            Role::Merlin | Role::Percival | Role::LoyalServant => Alignment::Good,
            Role::Morgana | Role::Assassin => Alignment::Evil,
        }
    }

    pub fn is_evil(self) -> bool {
        self.alignment() == Alignment::Evil
    }

    /// English display name.
    pub fn name(self) -> &'static str {
        match self {
            Role::Merlin => "Merlin",
            Role::Percival => "Percival",
            Role::LoyalServant => "Loyal Servant",
            Role::Morgana => "Morgana",
            Role::Assassin => "Assassin",
        }
    }

    /// Chinese display name, matching the wording used in game transcripts.
    pub fn name_zh(self) -> &'static str {
        match self {
            Role::Merlin => "梅林",
            Role::Percival => "派西维尔",
            Role::LoyalServant => "忠臣",
            Role::Morgana => "莫甘娜",
            Role::Assassin => "刺客",
        }
    }

    /// The canonical role multiset: one Merlin, one Percival, two Loyal
    /// Servants, one Morgana, one Assassin.
    pub fn canonical_multiset() -> [Role; PLAYER_COUNT] {
        [
            Role::Merlin,
            Role::Percival,
            Role::LoyalServant,
            Role::LoyalServant,
            Role::Morgana,
            Role::Assassin,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alignment {
    Good,
    Evil,
}

/// Complete hidden-role assignment for the six seats.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, Role>", into = "BTreeMap<String, Role>")]
pub struct RoleAssignment {
    roles: [Role; PLAYER_COUNT],
}

impl RoleAssignment {
    /// Builds an assignment from `(player, role)` pairs, validating that the
    /// role multiset is the canonical one and that every seat is covered.
    pub fn new(pairs: impl IntoIterator<Item = (PlayerId, Role)>) -> Result<Self, GameError> {
        let mut roles: [Option<Role>; PLAYER_COUNT] = [None; PLAYER_COUNT];
        for (player, role) in pairs {
            if roles[player.index()].replace(role).is_some() {
                return Err(GameError::InvalidAssignment(format!(
                    "duplicate entry for player {player}"
                )));
            }
        }
        let mut out = [Role::Merlin; PLAYER_COUNT];
        for (i, slot) in roles.iter().enumerate() {
            out[i] = slot.ok_or_else(|| {
                GameError::InvalidAssignment(format!("missing entry for player {}", i + 1))
            })?;
        }
        let mut sorted = out;
        sorted.sort();
        let mut expected = Role::canonical_multiset();
        expected.sort();
        if sorted != expected {
            return Err(GameError::InvalidAssignment(
                "role multiset must be {Merlin, Percival, Loyal×2, Morgana, Assassin}".into(),
            ));
        }
        Ok(RoleAssignment { roles: out })
    }

    pub fn role_of(&self, player: PlayerId) -> Role {
        self.roles[player.index()]
    }

    /// The unique seat holding `role`; panics if called with `LoyalServant`
    /// (use [`RoleAssignment::players_with`] for non-unique roles).
    pub fn seat_of(&self, role: Role) -> PlayerId {
        assert_ne!(role, Role::LoyalServant, "loyal servant seat is not unique");
        self.players_with(role).next().expect("canonical multiset")
    }

    pub fn players_with(&self, role: Role) -> impl Iterator<Item = PlayerId> + '_ {
        PlayerId::all().filter(move |p| self.role_of(*p) == role)
    }

    pub fn evil_players(&self) -> impl Iterator<Item = PlayerId> + '_ {
        PlayerId::all().filter(move |p| self.role_of(*p).is_evil())
    }

    pub fn iter(&self) -> impl Iterator<Item = (PlayerId, Role)> + '_ {
        PlayerId::all().map(move |p| (p, self.role_of(p)))
    }
}

impl TryFrom<BTreeMap<String, Role>> for RoleAssignment {
    type Error = GameError;

    fn try_from(map: BTreeMap<String, Role>) -> Result<Self, Self::Error> {
        let mut pairs = Vec::with_capacity(map.len());
        for (key, role) in map {
            let id: u8 = key
                .parse()
                .map_err(|_| GameError::InvalidAssignment(format!("bad player key {key:?}")))?;
            pairs.push((PlayerId::new(id)?, role));
        }
        RoleAssignment::new(pairs)
    }
}

impl From<RoleAssignment> for BTreeMap<String, Role> {
    fn from(assignment: RoleAssignment) -> Self {
        assignment
            .iter()
            .map(|(p, r)| (p.get().to_string(), r))
            .collect()
    }
}

/// What one seat knows about another at game start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnowledgeLabel {
    /// Merlin's view of an evil seat.
    Evil,
    /// Percival's view: Merlin or Morgana, indistinguishable.
    Ambiguous,
    /// An evil seat's view of the other evil seat.
    Teammate,
}

/// Start-of-game knowledge for `viewer` under the visibility rules: Merlin
/// sees both evil seats, Percival sees Merlin and Morgana under one ambiguous
/// label, the evil seats see each other, and Loyal Servants see nothing.
pub fn visible_info(
    assignment: &RoleAssignment,
    viewer: PlayerId,
) -> BTreeSet<(PlayerId, KnowledgeLabel)> {
    let mut out = BTreeSet::new();
    match assignment.role_of(viewer) {
        Role::Merlin => {
            for p in assignment.evil_players() {
                out.insert((p, KnowledgeLabel::Evil));
            }
        }
        Role::Percival => {
            out.insert((assignment.seat_of(Role::Merlin), KnowledgeLabel::Ambiguous));
            out.insert((assignment.seat_of(Role::Morgana), KnowledgeLabel::Ambiguous));
        }
        Role::Morgana => {
            out.insert((assignment.seat_of(Role::Assassin), KnowledgeLabel::Teammate));
        }
        Role::Assassin => {
            out.insert((assignment.seat_of(Role::Morgana), KnowledgeLabel::Teammate));
        }
        Role::LoyalServant => {}
    }
    out
}

/// Team size for the given mission (1-based).
pub fn required_team_size(mission_index: u8) -> Result<usize, GameError> {
    if (1..=5).contains(&mission_index) {
        Ok(TEAM_SIZES[mission_index as usize - 1])
    } else {
        Err(GameError::OutOfRange(mission_index))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissionResult {
    Success,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissionVote {
    Success,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Proposing,
    TeamVoting,
    MissionVoting,
    Assassination,
    Finished,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeReason {
    ThreeSuccessesAndAssassinMissed,
    AssassinHitMerlin,
    ThreeFailures,
    FiveRejections,
    EarlyKnifeHit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub winner: Alignment,
    pub reason: OutcomeReason,
}

impl GameOutcome {
    fn from_reason(reason: OutcomeReason) -> Self {
        let winner = match reason {
            OutcomeReason::AssassinHitMerlin
            | OutcomeReason::EarlyKnifeHit
            | OutcomeReason::ThreeFailures
            | OutcomeReason::FiveRejections => Alignment::Evil,
            OutcomeReason::ThreeSuccessesAndAssassinMissed => Alignment::Good,
        };
        GameOutcome { winner, reason }
    }
}

/// Immutable snapshot of a game in progress. Operations return fresh values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    assignment: RoleAssignment,
    mission_index: u8,
    proposal_round: u32,
    leader: PlayerId,
    mission_results: Vec<MissionResult>,
    consecutive_rejections: u8,
    phase: Phase,
    outcome: Option<GameOutcome>,
    current_team: Option<BTreeSet<PlayerId>>,
}

impl GameState {
    pub fn assignment(&self) -> &RoleAssignment {
        &self.assignment
    }

    pub fn mission_index(&self) -> u8 {
        self.mission_index
    }

    pub fn proposal_round(&self) -> u32 {
        self.proposal_round
    }

    pub fn leader(&self) -> PlayerId {
        self.leader
    }

    pub fn mission_results(&self) -> &[MissionResult] {
        &self.mission_results
    }

    pub fn consecutive_rejections(&self) -> u8 {
        self.consecutive_rejections
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn outcome(&self) -> Option<GameOutcome> {
        self.outcome
    }

    /// Team pending a vote or executing a mission, if any.
    pub fn current_team(&self) -> Option<&BTreeSet<PlayerId>> {
        self.current_team.as_ref()
    }

    pub fn successes(&self) -> usize {
        self.mission_results
            .iter()
            .filter(|r| **r == MissionResult::Success)
            .count()
    }

    pub fn failures(&self) -> usize {
        self.mission_results
            .iter()
            .filter(|r| **r == MissionResult::Fail)
            .count()
    }

    /// Overrides the leader without other changes. Sessions record the
    /// platform-assigned leader explicitly; replay uses this rather than
    /// assuming any rotation order.
    pub fn with_leader(&self, leader: PlayerId) -> GameState {
        let mut next = self.clone();
        next.leader = leader;
        next
    }

    fn expect_phase(&self, expected: Phase) -> Result<(), GameError> {
        if self.phase == expected {
            Ok(())
        } else {
            Err(GameError::WrongPhase {
                expected,
                found: self.phase,
            })
        }
    }

    fn finish(mut self, reason: OutcomeReason) -> GameState {
        self.outcome = Some(GameOutcome::from_reason(reason));
        self.phase = Phase::Finished;
        self.current_team = None;
        self
    }
}

/// Creates the initial state: mission 1, round 1, no results, `Proposing`.
pub fn new_game(assignment: RoleAssignment, first_leader: PlayerId) -> GameState {
    GameState {
        assignment,
        mission_index: 1,
        proposal_round: 1,
        leader: first_leader,
        mission_results: Vec::new(),
        consecutive_rejections: 0,
        phase: Phase::Proposing,
        outcome: None,
        current_team: None,
    }
}

/// The leader commits a final team of the required size; the table moves to
/// the public vote.
pub fn propose_team(state: &GameState, team: &BTreeSet<PlayerId>) -> Result<GameState, GameError> {
    state.expect_phase(Phase::Proposing)?;
    let required = required_team_size(state.mission_index)?;
    if team.len() != required {
        return Err(GameError::BadTeamSize {
            required,
            got: team.len(),
        });
    }
    let mut next = state.clone();
    next.phase = Phase::TeamVoting;
    next.current_team = Some(team.clone());
    Ok(next)
}

/// The leader fails to commit a team (timeout on the game platform).
/// Leadership passes cyclically and the proposal round advances; this is not
/// a failed vote, so the rejection counter is untouched.
pub fn expire_proposal(state: &GameState) -> Result<GameState, GameError> {
    if state.phase != Phase::Proposing && state.phase != Phase::TeamVoting {
        return Err(GameError::WrongPhase {
            expected: Phase::Proposing,
            found: state.phase,
        });
    }
    let mut next = state.clone();
    next.phase = Phase::Proposing;
    next.current_team = None;
    next.leader = next.leader.next();
    next.proposal_round += 1;
    Ok(next)
}

/// Resolves the public vote on `proposal`. Approval requires a strict
/// majority of the six seats (more than three approvals; ties reject). The
/// fifth consecutive rejection ends the game in Evil's favour.
pub fn apply_team_vote(
    state: &GameState,
    proposal: &BTreeSet<PlayerId>,
    approvals: &BTreeSet<PlayerId>,
) -> Result<GameState, GameError> {
    state.expect_phase(Phase::TeamVoting)?;
    let required = required_team_size(state.mission_index)?;
    if proposal.len() != required {
        return Err(GameError::BadTeamSize {
            required,
            got: proposal.len(),
        });
    }
    let mut next = state.clone();
    if approvals.len() > PLAYER_COUNT / 2 {
        next.consecutive_rejections = 0;
        next.phase = Phase::MissionVoting;
        next.current_team = Some(proposal.clone());
        Ok(next)
    } else if state.consecutive_rejections + 1 >= MAX_REJECTIONS {
        Ok(next.finish(OutcomeReason::FiveRejections))
    } else {
        next.consecutive_rejections += 1;
        next.phase = Phase::Proposing;
        next.current_team = None;
        next.leader = next.leader.next();
        next.proposal_round += 1;
        Ok(next)
    }
}

/// Resolves the secret mission votes. Every team member must vote, only
/// evil-aligned members may vote `Fail`, and a single `Fail` sinks the
/// mission. Third failure ends the game; third success opens the
/// assassination phase; otherwise play moves to the next mission.
pub fn apply_mission_votes(
    state: &GameState,
    votes: &BTreeMap<PlayerId, MissionVote>,
) -> Result<GameState, GameError> {
    state.expect_phase(Phase::MissionVoting)?;
    let team = state
        .current_team
        .clone()
        .expect("mission voting phase always has a team");
    for player in votes.keys() {
        if !team.contains(player) {
            return Err(GameError::NotOnTeam(*player));
        }
    }
    for member in &team {
        match votes.get(member) {
            None => return Err(GameError::MissingVote(*member)),
            Some(MissionVote::Fail) if !state.assignment.role_of(*member).is_evil() => {
                return Err(GameError::GoodPlayerFailVote(*member));
            }
            Some(_) => {}
        }
    }
    let fails = votes.values().filter(|v| **v == MissionVote::Fail).count();
    let result = if fails > 0 {
        MissionResult::Fail
    } else {
        MissionResult::Success
    };
    let mut next = state.clone();
    next.mission_results.push(result);
    next.current_team = None;
    if next.failures() >= 3 {
        return Ok(next.finish(OutcomeReason::ThreeFailures));
    }
    if next.successes() >= 3 {
        next.phase = Phase::Assassination;
        return Ok(next);
    }
    next.mission_index += 1;
    next.proposal_round = 1;
    next.leader = next.leader.next();
    next.phase = Phase::Proposing;
    Ok(next)
}

/// The assassin names a target. In the regular flow this happens in the
/// assassination phase after three successes; with `early` set it may happen
/// at any point before the game ends (both evil seats agreeing to knife).
/// An early miss does not end the game — play continues.
pub fn assassinate(
    state: &GameState,
    target: PlayerId,
    early: bool,
) -> Result<GameState, GameError> {
    if early {
        if state.phase == Phase::Finished {
            return Err(GameError::WrongPhase {
                expected: Phase::Assassination,
                found: state.phase,
            });
        }
    } else {
        state.expect_phase(Phase::Assassination)?;
    }
    let hit = state.assignment.role_of(target) == Role::Merlin;
    let next = state.clone();
    match (early, hit) {
        (false, true) => Ok(next.finish(OutcomeReason::AssassinHitMerlin)),
        (false, false) => Ok(next.finish(OutcomeReason::ThreeSuccessesAndAssassinMissed)),
        (true, true) => Ok(next.finish(OutcomeReason::EarlyKnifeHit)),
        (true, false) => Ok(next),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("player id {0} out of range 1..=6")]
    InvalidPlayer(u8),
    #[error("invalid role assignment: {0}")]
    InvalidAssignment(String),
    #[error("mission index {0} out of range 1..=5")]
    OutOfRange(u8),
    #[error("operation requires phase {expected:?}, state is in {found:?}")]
    WrongPhase { expected: Phase, found: Phase },
    #[error("team must have {required} members, got {got}")]
    BadTeamSize { required: usize, got: usize },
    #[error("good-aligned player {0} cannot vote fail")]
    GoodPlayerFailVote(PlayerId),
    #[error("missing mission vote for team member {0}")]
    MissingVote(PlayerId),
    #[error("player {0} voted on a mission they are not part of")]
    NotOnTeam(PlayerId),
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn pid(n: u8) -> PlayerId {
        PlayerId::new(n).unwrap()
    }

    pub(crate) fn set(ids: &[u8]) -> BTreeSet<PlayerId> {
        ids.iter().map(|n| pid(*n)).collect()
    }

    /// The role layout of the bundled reference session: 1 Percival,
    /// 2 Assassin, 3 Loyal, 4 Merlin, 5 Morgana, 6 Loyal.
    pub(crate) fn reference_assignment() -> RoleAssignment {
        RoleAssignment::new([
            (pid(1), Role::Percival),
            (pid(2), Role::Assassin),
            (pid(3), Role::LoyalServant),
            (pid(4), Role::Merlin),
            (pid(5), Role::Morgana),
            (pid(6), Role::LoyalServant),
        ])
        .unwrap()
    }

    #[test]
    fn new_game_starts_clean() {
        let state = new_game(reference_assignment(), pid(1));
        assert_eq!(state.mission_index(), 1);
        assert_eq!(state.proposal_round(), 1);
        assert!(state.mission_results().is_empty());
        assert_eq!(state.consecutive_rejections(), 0);
        assert_eq!(state.phase(), Phase::Proposing);
        assert!(state.outcome().is_none());
    }

    #[test]
    fn two_merlins_rejected() {
        let err = RoleAssignment::new([
            (pid(1), Role::Merlin),
            (pid(2), Role::Merlin),
            (pid(3), Role::LoyalServant),
            (pid(4), Role::Percival),
            (pid(5), Role::Morgana),
            (pid(6), Role::Assassin),
        ])
        .unwrap_err();
        assert!(matches!(err, GameError::InvalidAssignment(_)));
    }

    #[test]
    fn visibility_table() {
        let a = reference_assignment();
        // Assassin (2) sees Morgana (5) as a teammate.
        assert_eq!(
            visible_info(&a, pid(2)),
            [(pid(5), KnowledgeLabel::Teammate)].into_iter().collect()
        );
        // Percival (1) sees Merlin (4) and Morgana (5) without distinction.
        assert_eq!(
            visible_info(&a, pid(1)),
            [
                (pid(4), KnowledgeLabel::Ambiguous),
                (pid(5), KnowledgeLabel::Ambiguous)
            ]
            .into_iter()
            .collect()
        );
        // Merlin (4) sees both evil seats.
        assert_eq!(
            visible_info(&a, pid(4)),
            [
                (pid(2), KnowledgeLabel::Evil),
                (pid(5), KnowledgeLabel::Evil)
            ]
            .into_iter()
            .collect()
        );
        // Loyal servants see nothing.
        assert!(visible_info(&a, pid(3)).is_empty());
        assert!(visible_info(&a, pid(6)).is_empty());
    }

    #[test]
    fn team_size_table() {
        assert_eq!(required_team_size(1).unwrap(), 2);
        assert_eq!(required_team_size(2).unwrap(), 3);
        assert_eq!(required_team_size(3).unwrap(), 4);
        assert_eq!(required_team_size(4).unwrap(), 3);
        assert_eq!(required_team_size(5).unwrap(), 4);
        assert!(matches!(required_team_size(6), Err(GameError::OutOfRange(6))));
        assert!(matches!(required_team_size(0), Err(GameError::OutOfRange(0))));
    }

    #[test]
    fn majority_vote_boundaries() {
        // Mission 2 size-3 team as in the reference game.
        let mut state = new_game(reference_assignment(), pid(2));
        state.mission_index = 2;
        let team = set(&[1, 2, 6]);
        let voting = propose_team(&state, &team).unwrap();
        // Five approvals of six: approved.
        let approved = apply_team_vote(&voting, &team, &set(&[1, 2, 4, 5, 6])).unwrap();
        assert_eq!(approved.phase(), Phase::MissionVoting);
        assert_eq!(approved.consecutive_rejections(), 0);
        // Three of six is a tie: rejected, leader advances.
        let rejected = apply_team_vote(&voting, &team, &set(&[1, 2, 4])).unwrap();
        assert_eq!(rejected.phase(), Phase::Proposing);
        assert_eq!(rejected.consecutive_rejections(), 1);
        assert_eq!(rejected.leader(), pid(3));
        assert_eq!(rejected.proposal_round(), 2);
    }

    #[test]
    fn fifth_rejection_hands_game_to_evil() {
        let mut state = new_game(reference_assignment(), pid(1));
        let team = set(&[1, 2]);
        for expected_rejections in 1..=4u8 {
            let voting = propose_team(&state, &team).unwrap();
            state = apply_team_vote(&voting, &team, &set(&[1])).unwrap();
            assert_eq!(state.consecutive_rejections(), expected_rejections);
            assert_eq!(state.phase(), Phase::Proposing);
        }
        let voting = propose_team(&state, &team).unwrap();
        let finished = apply_team_vote(&voting, &team, &set(&[1])).unwrap();
        assert_eq!(finished.phase(), Phase::Finished);
        assert_eq!(
            finished.outcome().unwrap(),
            GameOutcome {
                winner: Alignment::Evil,
                reason: OutcomeReason::FiveRejections
            }
        );
    }

    #[test]
    fn approval_resets_rejection_counter() {
        let mut state = new_game(reference_assignment(), pid(1));
        let team = set(&[1, 2]);
        let voting = propose_team(&state, &team).unwrap();
        state = apply_team_vote(&voting, &team, &set(&[2])).unwrap();
        assert_eq!(state.consecutive_rejections(), 1);
        let voting = propose_team(&state, &team).unwrap();
        state = apply_team_vote(&voting, &team, &set(&[1, 2, 3, 4])).unwrap();
        assert_eq!(state.consecutive_rejections(), 0);
    }

    #[test]
    fn mission_fails_on_single_bad_vote() {
        let mut state = new_game(reference_assignment(), pid(2));
        state.mission_index = 2;
        let team = set(&[1, 2, 6]);
        let voting = propose_team(&state, &team).unwrap();
        let mission = apply_team_vote(&voting, &team, &set(&[1, 2, 4, 5, 6])).unwrap();
        let votes: BTreeMap<_, _> = [
            (pid(1), MissionVote::Success),
            (pid(2), MissionVote::Fail),
            (pid(6), MissionVote::Success),
        ]
        .into_iter()
        .collect();
        let after = apply_mission_votes(&mission, &votes).unwrap();
        assert_eq!(after.mission_results(), &[MissionResult::Fail]);
        assert_eq!(after.mission_index(), 3);
        assert_eq!(after.phase(), Phase::Proposing);
    }

    #[test]
    fn all_success_votes_succeed() {
        let state = new_game(reference_assignment(), pid(1));
        let team = set(&[1, 6]);
        let voting = propose_team(&state, &team).unwrap();
        let mission = apply_team_vote(&voting, &team, &set(&[1, 2, 3, 4, 5, 6])).unwrap();
        let votes: BTreeMap<_, _> = [
            (pid(1), MissionVote::Success),
            (pid(6), MissionVote::Success),
        ]
        .into_iter()
        .collect();
        let after = apply_mission_votes(&mission, &votes).unwrap();
        assert_eq!(after.mission_results(), &[MissionResult::Success]);
    }

    #[test]
    fn good_player_cannot_fail() {
        let state = new_game(reference_assignment(), pid(1));
        let team = set(&[1, 6]);
        let voting = propose_team(&state, &team).unwrap();
        let mission = apply_team_vote(&voting, &team, &set(&[1, 2, 3, 4, 5, 6])).unwrap();
        let votes: BTreeMap<_, _> = [
            (pid(1), MissionVote::Fail),
            (pid(6), MissionVote::Success),
        ]
        .into_iter()
        .collect();
        assert_eq!(
            apply_mission_votes(&mission, &votes).unwrap_err(),
            GameError::GoodPlayerFailVote(pid(1))
        );
    }

    #[test]
    fn missing_vote_detected() {
        let state = new_game(reference_assignment(), pid(1));
        let team = set(&[1, 6]);
        let voting = propose_team(&state, &team).unwrap();
        let mission = apply_team_vote(&voting, &team, &set(&[1, 2, 3, 4, 5, 6])).unwrap();
        let votes: BTreeMap<_, _> = [(pid(1), MissionVote::Success)].into_iter().collect();
        assert_eq!(
            apply_mission_votes(&mission, &votes).unwrap_err(),
            GameError::MissingVote(pid(6))
        );
    }

    #[test]
    fn third_failure_ends_game() {
        // Drive three failing missions with the evil seats on each team.
        let mut state = new_game(reference_assignment(), pid(1));
        for _ in 0..3 {
            let size = required_team_size(state.mission_index()).unwrap();
            let mut team = set(&[2]);
            for p in PlayerId::all() {
                if team.len() < size && p != pid(2) {
                    team.insert(p);
                }
            }
            let voting = propose_team(&state, &team).unwrap();
            state = apply_team_vote(&voting, &team, &set(&[1, 2, 3, 4, 5, 6])).unwrap();
            let votes: BTreeMap<_, _> = team
                .iter()
                .map(|p| {
                    let vote = if *p == pid(2) {
                        MissionVote::Fail
                    } else {
                        MissionVote::Success
                    };
                    (*p, vote)
                })
                .collect();
            state = apply_mission_votes(&state, &votes).unwrap();
        }
        assert_eq!(state.phase(), Phase::Finished);
        assert_eq!(
            state.outcome().unwrap(),
            GameOutcome {
                winner: Alignment::Evil,
                reason: OutcomeReason::ThreeFailures
            }
        );
    }

    fn reach_assassination() -> GameState {
        let mut state = new_game(reference_assignment(), pid(1));
        for _ in 0..3 {
            let size = required_team_size(state.mission_index()).unwrap();
            let team: BTreeSet<_> = PlayerId::all()
                .filter(|p| !state.assignment().role_of(*p).is_evil())
                .take(size)
                .collect();
            let voting = propose_team(&state, &team).unwrap();
            state = apply_team_vote(&voting, &team, &set(&[1, 2, 3, 4, 5, 6])).unwrap();
            let votes: BTreeMap<_, _> =
                team.iter().map(|p| (*p, MissionVote::Success)).collect();
            state = apply_mission_votes(&state, &votes).unwrap();
        }
        state
    }

    #[test]
    fn assassination_resolves_both_ways() {
        let state = reach_assassination();
        assert_eq!(state.phase(), Phase::Assassination);
        let hit = assassinate(&state, pid(4), false).unwrap();
        assert_eq!(
            hit.outcome().unwrap(),
            GameOutcome {
                winner: Alignment::Evil,
                reason: OutcomeReason::AssassinHitMerlin
            }
        );
        let miss = assassinate(&state, pid(3), false).unwrap();
        assert_eq!(
            miss.outcome().unwrap(),
            GameOutcome {
                winner: Alignment::Good,
                reason: OutcomeReason::ThreeSuccessesAndAssassinMissed
            }
        );
    }

    #[test]
    fn early_knife_hit_and_miss() {
        let state = new_game(reference_assignment(), pid(1));
        let hit = assassinate(&state, pid(4), true).unwrap();
        assert_eq!(
            hit.outcome().unwrap(),
            GameOutcome {
                winner: Alignment::Evil,
                reason: OutcomeReason::EarlyKnifeHit
            }
        );
        // A miss keeps the game running.
        let miss = assassinate(&state, pid(6), true).unwrap();
        assert_eq!(miss.phase(), Phase::Proposing);
        assert!(miss.outcome().is_none());
    }

    #[test]
    fn expired_proposal_advances_leader_without_counting_rejection() {
        let state = new_game(reference_assignment(), pid(3));
        let after = expire_proposal(&state).unwrap();
        assert_eq!(after.leader(), pid(4));
        assert_eq!(after.proposal_round(), 2);
        assert_eq!(after.consecutive_rejections(), 0);
        assert_eq!(after.phase(), Phase::Proposing);
    }

    #[test]
    fn visible_info_is_pure_and_loyal_blind() {
        let a = reference_assignment();
        for viewer in PlayerId::all() {
            assert_eq!(visible_info(&a, viewer), visible_info(&a, viewer));
        }
        for loyal in a.players_with(Role::LoyalServant) {
            assert!(visible_info(&a, loyal).is_empty());
        }
    }
}
