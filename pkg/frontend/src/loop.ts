// Trial-loop driver shared by the browser app and the headless tests. All
// authoritative state lives on the service; the loop only advances the view
// machine. Network failures surface through hooks.retry and the failed call
// is re-attempted, so a flaky connection never loses a trial.

import { JudgmentResponse, SessionApi, TrialResponse } from './api.js';
import * as S from './state.js';

export interface Judgment {
  judgedCorrect: boolean;
  responseMs: number;
}

export interface LoopHooks {
  render(state: S.ViewState): void;
  animate(trial: S.TrialView): Promise<void>;
  judge(trial: S.TrialView): Promise<Judgment>;
  feedback(fb: S.FeedbackView, state: S.ViewState): Promise<void>;
  retry(error: unknown): Promise<void>;
}

const PRACTICE_COLORS: [string, string] = ['gray', 'gold'];

export function makePracticeTrial(rand: () => number = Math.random): {
  view: S.TrialView;
  aiCorrect: boolean;
} {
  const confidence = Math.floor(rand() * 11) / 10;
  const view = S.makeTrialView(0, PRACTICE_COLORS[rand() < 0.5 ? 0 : 1], PRACTICE_COLORS, confidence, true);
  return { view, aiCorrect: rand() < 0.5 };
}

async function withRetry<T>(
  call: () => Promise<T>,
  getState: () => S.ViewState,
  setState: (s: S.ViewState) => void,
  hooks: LoopHooks,
): Promise<T> {
  for (;;) {
    try {
      return await call();
    } catch (err) {
      setState(S.networkError(getState(), err instanceof Error ? err.message : String(err)));
      hooks.render(getState());
      await hooks.retry(err);
      setState(S.clearError(getState()));
      hooks.render(getState());
    }
  }
}

async function playTrial(
  state: S.ViewState,
  view: S.TrialView,
  submit: (j: Judgment) => Promise<S.FeedbackView>,
  hooks: LoopHooks,
  setState: (s: S.ViewState) => void,
): Promise<S.ViewState> {
  state = S.startAnimation(state, view);
  setState(state);
  hooks.render(state);
  await hooks.animate(view);
  state = S.animationFinished(state);
  setState(state);
  hooks.render(state);
  const judgment = await hooks.judge(view);
  state = S.judgmentSubmitted(state);
  setState(state);
  const fb = await submit(judgment);
  state = S.feedbackReceived(state, fb);
  setState(state);
  hooks.render(state);
  await hooks.feedback(fb, state);
  return state;
}

/** One practice round; local only, never posted, never counted. */
export async function runPractice(
  state: S.ViewState,
  hooks: LoopHooks,
  rand: () => number = Math.random,
): Promise<S.ViewState> {
  const { view, aiCorrect } = makePracticeTrial(rand);
  let current = state;
  const setState = (s: S.ViewState) => {
    current = s;
  };
  return playTrial(
    current,
    view,
    async (judgment) => ({
      wasHumanCorrect: judgment.judgedCorrect === aiCorrect,
      scoreDelta: 0,
      bonus: current.bonus,
      isPractice: true,
    }),
    hooks,
    setState,
  );
}

function trialView(trial: TrialResponse): S.TrialView {
  return S.makeTrialView(
    trial.trial_index,
    trial.ai_prediction_color,
    trial.colors,
    trial.ai_confidence,
  );
}

function feedbackView(resp: JudgmentResponse): S.FeedbackView {
  return {
    wasHumanCorrect: resp.was_human_correct,
    scoreDelta: resp.score_delta,
    bonus: resp.bonus_accrued,
    isPractice: false,
  };
}

/** Drive the remaining trials of a session to completion. */
export async function runTrialLoop(
  api: SessionApi,
  sessionId: string,
  state: S.ViewState,
  hooks: LoopHooks,
): Promise<S.ViewState> {
  let current = state;
  const setState = (s: S.ViewState) => {
    current = s;
  };
  while (current.completed < current.nTrials) {
    const trial = await withRetry(() => api.getTrial(sessionId), () => current, setState, hooks);
    current = await playTrial(
      current,
      trialView(trial),
      async (judgment) =>
        feedbackView(
          await withRetry(
            () => api.postJudgment(sessionId, judgment.judgedCorrect, judgment.responseMs),
            () => current,
            setState,
            hooks,
          ),
        ),
      hooks,
      setState,
    );
  }
  current = S.finish(current);
  hooks.render(current);
  return current;
}

/** Rebuild the view state of an in-progress session from the service alone. */
export async function resumeState(api: SessionApi, sessionId: string, nTrials: number): Promise<S.ViewState> {
  const csv = await api.exportCsv(sessionId);
  const lines = csv.trim().split('\n').slice(1).filter((l) => l.length > 0);
  const score = lines.filter((line) => line.split(',')[6] === '1').length;
  const state = S.initialState(nTrials);
  return {
    ...state,
    // already past onboarding; ready for the next animating transition
    phase: 'feedback',
    completed: lines.length,
    score,
    bonus: Math.min(score * 0.01, S.BONUS_CAP),
  };
}
