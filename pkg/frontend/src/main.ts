// Browser entry point: wires the state machine and trial loop to the DOM.

import { SessionApi } from './api.js';
import { countByColor, generateScene, stepScene } from './dots.js';
import { Judgment, LoopHooks, resumeState, runPractice, runTrialLoop } from './loop.js';
import * as S from './state.js';

const api = new SessionApi('');

const $ = (id: string): HTMLElement => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
};

const screens = ['intro', 'task', 'done'] as const;

function showScreen(name: (typeof screens)[number]): void {
  for (const s of screens) {
    $(`screen-${s}`).classList.toggle('hidden', s !== name);
  }
}

function render(state: S.ViewState): void {
  $('error-banner').classList.toggle('hidden', state.error === null);
  if (state.error !== null) {
    $('error-message').textContent = 'Connection problem. Your progress is saved.';
  }
  if (state.phase === 'intro') {
    showScreen('intro');
    return;
  }
  if (state.phase === 'done') {
    showScreen('done');
    $('final-score').textContent = `${state.score} / ${state.nTrials} correct`;
    $('final-bonus').textContent = S.formatBonus(state.bonus);
    return;
  }
  showScreen('task');
  const trial = state.trial;
  const practice = trial?.isPractice ?? false;
  $('trial-label').textContent = practice
    ? 'Practice trial'
    : `Trial ${state.completed + 1} of ${state.nTrials}`;
  $('score-line').textContent = `Score ${state.score} · Bonus ${S.formatBonus(state.bonus)}`;

  const showPrediction = state.phase === 'judging' || state.phase === 'feedback';
  $('prediction-line').classList.toggle('invisible', !showPrediction);
  if (trial && showPrediction) {
    $('prediction-line').textContent =
      `AI prediction: ${trial.predictionColor} — Confidence: ${trial.confidencePercent}%`;
  }

  const judging = state.phase === 'judging' && !state.requestInFlight;
  ($('btn-correct') as HTMLButtonElement).disabled = !judging;
  ($('btn-wrong') as HTMLButtonElement).disabled = !judging;

  const fb = state.feedback;
  $('feedback-line').classList.toggle('invisible', state.phase !== 'feedback' || !fb);
  if (state.phase === 'feedback' && fb) {
    const outcome = fb.wasHumanCorrect ? 'You were RIGHT' : 'You were WRONG';
    const delta = fb.isPractice ? '(practice, not scored)' : `+${fb.scoreDelta} point`;
    $('feedback-line').textContent = `${outcome} ${delta} · Bonus ${S.formatBonus(fb.isPractice ? 0 : fb.bonus)}`;
  }
}

function animate(trial: S.TrialView): Promise<void> {
  const canvas = $('dots-canvas') as HTMLCanvasElement;
  const ctx = canvas.getContext('2d');
  if (!ctx) return Promise.resolve();
  const scene = generateScene(trial.colors, undefined, canvas.width, canvas.height);
  const counts = countByColor(scene);
  if (new Set(Object.values(counts)).size !== 1) {
    throw new Error('dot counts must be identical per color');
  }
  const start = performance.now();
  return new Promise((resolve) => {
    const frame = (now: number): void => {
      stepScene(scene);
      ctx.clearRect(0, 0, canvas.width, canvas.height);
      for (const dot of scene.dots) {
        ctx.beginPath();
        ctx.arc(dot.x, dot.y, 4, 0, Math.PI * 2);
        ctx.fillStyle = dot.color;
        ctx.fill();
      }
      if (now - start < 1000) {
        requestAnimationFrame(frame);
      } else {
        resolve();
      }
    };
    requestAnimationFrame(frame);
  });
}

function judge(): Promise<Judgment> {
  const enabledAt = performance.now();
  return new Promise((resolve) => {
    const answer = (judgedCorrect: boolean) => () => {
      $('btn-correct').removeEventListener('click', onCorrect);
      $('btn-wrong').removeEventListener('click', onWrong);
      resolve({ judgedCorrect, responseMs: Math.round(performance.now() - enabledAt) });
    };
    const onCorrect = answer(true);
    const onWrong = answer(false);
    $('btn-correct').addEventListener('click', onCorrect);
    $('btn-wrong').addEventListener('click', onWrong);
  });
}

function feedbackPause(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 1200));
}

function retry(): Promise<void> {
  return new Promise((resolve) => {
    const btn = $('btn-retry');
    const handler = () => {
      btn.removeEventListener('click', handler);
      resolve();
    };
    btn.addEventListener('click', handler);
  });
}

const hooks: LoopHooks = {
  render,
  animate,
  judge: () => judge(),
  feedback: () => feedbackPause(),
  retry,
};

async function startFresh(): Promise<void> {
  let state = S.initialState();
  render(state);
  await new Promise<void>((resolve) => {
    const btn = $('btn-start');
    const handler = () => {
      btn.removeEventListener('click', handler);
      resolve();
    };
    btn.addEventListener('click', handler);
  });
  state = S.showPractice(state);
  state = await runPractice(state, hooks);
  const created = await api.createSession();
  localStorage.setItem('trustcal-session', created.session_id);
  localStorage.setItem('trustcal-ntrials', String(created.n_trials));
  state = { ...state, nTrials: created.n_trials };
  state = await runTrialLoop(api, created.session_id, state, hooks);
  finishUp(created.session_id, state);
}

async function resume(sessionId: string, nTrials: number): Promise<void> {
  let state = await resumeState(api, sessionId, nTrials);
  render(state);
  if (state.completed >= state.nTrials) {
    finishUp(sessionId, S.finish(state));
    return;
  }
  state = await runTrialLoop(api, sessionId, state, hooks);
  finishUp(sessionId, state);
}

function finishUp(sessionId: string, state: S.ViewState): void {
  render(state);
  ($('btn-download') as HTMLAnchorElement).href = api.exportUrl(sessionId);
  localStorage.removeItem('trustcal-session');
  localStorage.removeItem('trustcal-ntrials');
}

async function boot(): Promise<void> {
  const existing = localStorage.getItem('trustcal-session');
  const nTrials = Number(localStorage.getItem('trustcal-ntrials') ?? '50');
  if (existing) {
    try {
      await resume(existing, nTrials);
      return;
    } catch {
      localStorage.removeItem('trustcal-session');
    }
  }
  await startFresh();
}

boot().catch((err) => {
  $('error-banner').classList.remove('hidden');
  $('error-message').textContent = String(err);
});
