// Dot-cloud cover story: two colors, identical counts, random-walk motion.
// The counts being equal is load-bearing (there is no visual signal to learn
// from); scene generation is pure so tests can assert it.

export interface Dot {
  x: number;
  y: number;
  vx: number;
  vy: number;
  color: string;
}

export interface Scene {
  width: number;
  height: number;
  dots: Dot[];
}

export const DOTS_PER_COLOR = 40;
const SPEED = 2.2;

export function generateScene(
  colors: [string, string],
  countPerColor: number = DOTS_PER_COLOR,
  width = 480,
  height = 280,
  rand: () => number = Math.random,
): Scene {
  const dots: Dot[] = [];
  for (const color of colors) {
    for (let i = 0; i < countPerColor; i++) {
      const angle = rand() * Math.PI * 2;
      dots.push({
        x: rand() * width,
        y: rand() * height,
        vx: Math.cos(angle) * SPEED,
        vy: Math.sin(angle) * SPEED,
        color,
      });
    }
  }
  return { width, height, dots };
}

export function stepScene(scene: Scene, rand: () => number = Math.random): void {
  for (const dot of scene.dots) {
    // jitter the heading a little, then bounce off the walls
    const turn = (rand() - 0.5) * 0.8;
    const cos = Math.cos(turn);
    const sin = Math.sin(turn);
    const vx = dot.vx * cos - dot.vy * sin;
    const vy = dot.vx * sin + dot.vy * cos;
    dot.vx = vx;
    dot.vy = vy;
    dot.x += dot.vx;
    dot.y += dot.vy;
    if (dot.x < 0) {
      dot.x = -dot.x;
      dot.vx = Math.abs(dot.vx);
    } else if (dot.x > scene.width) {
      dot.x = 2 * scene.width - dot.x;
      dot.vx = -Math.abs(dot.vx);
    }
    if (dot.y < 0) {
      dot.y = -dot.y;
      dot.vy = Math.abs(dot.vy);
    } else if (dot.y > scene.height) {
      dot.y = 2 * scene.height - dot.y;
      dot.vy = -Math.abs(dot.vy);
    }
  }
}

export function countByColor(scene: Scene): Record<string, number> {
  const counts: Record<string, number> = {};
  for (const dot of scene.dots) {
    counts[dot.color] = (counts[dot.color] ?? 0) + 1;
  }
  return counts;
}
