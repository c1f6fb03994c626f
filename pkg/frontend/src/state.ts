// Pure view-state machine. Phases advance intro -> practice ->
// (animating -> judging -> feedback) x N -> done; every transition helper
// throws on an illegal source phase so the UI cannot skip steps. Judgment is
// accepted only in the judging phase and only while no request is in flight.

export type Phase = 'intro' | 'practice' | 'animating' | 'judging' | 'feedback' | 'done';

export interface TrialView {
  trialIndex: number;
  predictionColor: string;
  colors: [string, string];
  confidencePercent: number; // always a multiple of 10
  isPractice: boolean;
}

export interface FeedbackView {
  wasHumanCorrect: boolean;
  scoreDelta: number;
  bonus: number;
  isPractice: boolean;
}

export interface ViewState {
  phase: Phase;
  nTrials: number;
  completed: number; // judged non-practice trials
  score: number;
  bonus: number;
  trial: TrialView | null;
  feedback: FeedbackView | null;
  requestInFlight: boolean;
  error: string | null;
}

export const BONUS_CAP = 0.5;

export function initialState(nTrials = 50): ViewState {
  return {
    phase: 'intro',
    nTrials,
    completed: 0,
    score: 0,
    bonus: 0,
    trial: null,
    feedback: null,
    requestInFlight: false,
    error: null,
  };
}

function expectPhase(state: ViewState, ...allowed: Phase[]): void {
  if (!allowed.includes(state.phase)) {
    throw new Error(`illegal transition from ${state.phase} (expected ${allowed.join('|')})`);
  }
}

export function makeTrialView(
  trialIndex: number,
  predictionColor: string,
  colors: string[],
  aiConfidence: number,
  isPractice = false,
): TrialView {
  const tenths = aiConfidence * 10;
  if (Math.abs(tenths - Math.round(tenths)) > 1e-9 || aiConfidence < 0 || aiConfidence > 1) {
    throw new Error(`refusing to display non-grid confidence ${aiConfidence}`);
  }
  if (colors.length < 2) {
    throw new Error('need two dot colors');
  }
  return {
    trialIndex,
    predictionColor,
    colors: [colors[0]!, colors[1]!],
    confidencePercent: Math.round(tenths) * 10,
    isPractice,
  };
}

export function showPractice(state: ViewState): ViewState {
  expectPhase(state, 'intro');
  return { ...state, phase: 'practice' };
}

export function startAnimation(state: ViewState, trial: TrialView): ViewState {
  expectPhase(state, 'practice', 'feedback');
  return { ...state, phase: 'animating', trial, feedback: null };
}

export function animationFinished(state: ViewState): ViewState {
  expectPhase(state, 'animating');
  return { ...state, phase: 'judging' };
}

export function judgmentSubmitted(state: ViewState): ViewState {
  expectPhase(state, 'judging');
  if (state.requestInFlight) {
    throw new Error('judgment already in flight');
  }
  return { ...state, requestInFlight: true };
}

export function feedbackReceived(state: ViewState, feedback: FeedbackView): ViewState {
  expectPhase(state, 'judging');
  const counted = feedback.isPractice ? 0 : 1;
  return {
    ...state,
    phase: 'feedback',
    requestInFlight: false,
    feedback,
    completed: state.completed + counted,
    score: state.score + (feedback.isPractice ? 0 : feedback.scoreDelta),
    bonus: feedback.isPractice ? state.bonus : feedback.bonus,
  };
}

export function finish(state: ViewState): ViewState {
  expectPhase(state, 'feedback');
  if (state.completed !== state.nTrials) {
    throw new Error(`cannot finish with ${state.completed}/${state.nTrials} trials judged`);
  }
  return { ...state, phase: 'done', trial: null };
}

export function networkError(state: ViewState, message: string): ViewState {
  return { ...state, error: message, requestInFlight: false };
}

export function clearError(state: ViewState): ViewState {
  return { ...state, error: null };
}

export function formatBonus(bonus: number): string {
  return `$${Math.min(bonus, BONUS_CAP).toFixed(2)}`;
}
