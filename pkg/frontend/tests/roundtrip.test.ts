// Full UI round trip against recorded server payloads: four +1 presses
// on a 4-color scene reach the converged banner, four undo presses
// restore the iteration-0 stats, and the displayed values stay equal to
// the server's /state payload throughout.

import { afterEach, describe, expect, it, vi } from "vitest";

import { Api } from "../src/api.js";
import type { CreateResponse, InspectResponse, SessionStats, StepResponse } from "../src/api.js";
import { SessionController } from "../src/app.js";
import type { ViewHooks } from "../src/app.js";
import { SessionView } from "../src/state.js";
import { scriptFetch } from "./helpers.js";
import rawFixture from "./fixtures/simple-session.json";

interface Fixture {
  create: CreateResponse;
  state_initial: SessionStats;
  steps: StepResponse[];
  step_converged: { detail: StepResponse };
  undos: SessionStats[];
  state_final: SessionStats;
  inspect: InspectResponse;
}

const fixture = rawFixture as unknown as Fixture;

function recordingHooks() {
  const log = { changed: 0, imageStale: 0, inspected: [] as Array<InspectResponse | null> };
  const hooks: ViewHooks = {
    changed: () => { log.changed += 1; },
    imageStale: () => { log.imageStale += 1; },
    inspected: (info) => { log.inspected.push(info); },
  };
  return { hooks, log };
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("simple-scene round trip", () => {
  it("reaches the converged banner in four presses and undoes back to iteration 0", async () => {
    const sid = fixture.create.id;
    const fetchLog = scriptFetch([
      { method: "POST", path: "/sessions", status: 201, body: fixture.create },
      { method: "POST", path: `/sessions/${sid}/step`, status: 200, body: fixture.steps[0] },
      { method: "POST", path: `/sessions/${sid}/step`, status: 200, body: fixture.steps[1] },
      { method: "POST", path: `/sessions/${sid}/step`, status: 200, body: fixture.steps[2] },
      { method: "POST", path: `/sessions/${sid}/step`, status: 409, body: fixture.step_converged },
      { method: "POST", path: `/sessions/${sid}/undo`, status: 200, body: fixture.undos[0] },
      { method: "POST", path: `/sessions/${sid}/undo`, status: 200, body: fixture.undos[1] },
      { method: "POST", path: `/sessions/${sid}/undo`, status: 200, body: fixture.undos[2] },
    ]);
    const view = new SessionView();
    const { hooks } = recordingHooks();
    const controller = new SessionController(new Api(""), view, hooks);

    await controller.create(new Blob([new Uint8Array(8)]), {
      mode: "vector",
      cutting: "overall-best",
    });
    expect(view.sessionId).toBe(sid);
    expect(view.stats).toEqual(fixture.state_initial);
    expect(view.series).toHaveLength(1);
    expect(view.banner.kind).toBe("none");

    // press +1 four times; the third response already reports converged
    // (banner at or before the step following n_vr = 4) and the fourth
    // press gets the authoritative 409 state
    expect(view.canStep).toBe(true);
    for (let press = 0; press < 4; press++) {
      await controller.step(1);
      if (press === 2) expect(view.banner.kind).toBe("converged");
    }
    expect(view.stats!.n_vr).toBe(4);
    expect(view.stats!.j).toBe(0);
    expect(view.stats!.tau).toBe(100);
    expect(view.banner.kind).toBe("converged");
    expect(view.canStep).toBe(false);
    expect(view.events).toHaveLength(3);
    // chart has iteration 0 plus one point per split
    expect(view.series.map((p) => p.iteration)).toEqual([0, 1, 2, 3]);
    expect(view.series[3].logJ).toBeNull();

    // press undo four times; the fourth is a no-op because the server
    // reported can_undo = false
    for (let press = 0; press < 4; press++) {
      await controller.undo(1);
    }
    expect(fetchLog.remaining()).toBe(0);
    expect(fetchLog.calls).toHaveLength(8);

    // iteration-0 stats restored, equal to the recorded /state payload
    expect(view.stats).toEqual(fixture.state_final);
    expect(view.stats).toEqual(fixture.state_initial);
    expect(view.banner.kind).toBe("none");
    expect(view.events).toEqual([]);
    expect(view.series.map((p) => p.iteration)).toEqual([0]);
    expect(view.canUndo).toBe(false);
  });

  it("mirrors each step response into the event log verbatim", async () => {
    const sid = fixture.create.id;
    scriptFetch([
      { method: "POST", path: "/sessions", status: 201, body: fixture.create },
      { method: "POST", path: `/sessions/${sid}/step`, status: 200, body: fixture.steps[0] },
      { method: "POST", path: `/sessions/${sid}/step`, status: 200, body: fixture.steps[1] },
    ]);
    const view = new SessionView();
    const { hooks } = recordingHooks();
    const controller = new SessionController(new Api(""), view, hooks);
    await controller.create(new Blob([new Uint8Array(8)]), {
      mode: "vector",
      cutting: "overall-best",
    });
    await controller.step(1);
    await controller.step(1);
    expect(view.events).toEqual([...fixture.steps[0].events, ...fixture.steps[1].events]);
    expect(view.stats!.event_count).toBe(2);
    // tau in the stats panel equals the last event's tau (no client math)
    expect(view.stats!.tau).toBe(fixture.steps[1].events[0].tau);
  });

  it("surfaces the inspect payload without reformatting", async () => {
    const sid = fixture.create.id;
    scriptFetch([
      { method: "POST", path: "/sessions", status: 201, body: fixture.create },
      { method: "GET", path: `/sessions/${sid}/inspect?x=1&y=1`, status: 200, body: fixture.inspect },
    ]);
    const view = new SessionView();
    const { hooks, log } = recordingHooks();
    const controller = new SessionController(new Api(""), view, hooks);
    await controller.create(new Blob([new Uint8Array(8)]), {
      mode: "vector",
      cutting: "overall-best",
    });
    // clicks outside the 64x64 image are ignored: no request, no panel
    await controller.inspect(64, 0);
    await controller.inspect(0, -1);
    await controller.inspect(1, 1);
    expect(log.inspected).toEqual([null, fixture.inspect]);
    expect(log.inspected[1]!.regions[0].best_delta_j)
      .toBe(fixture.inspect.regions[0].best_delta_j);
  });
});
