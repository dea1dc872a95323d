// Explorer state machine. One in-flight mutation at a time; a 409 from a
// stale click becomes a notice plus a snapshot refresh and never corrupts
// the local state (the server is the single source of replay truth).

import { ApiError, ServiceApi } from './api'
import { applySession, buildSwimlane, type Axis, type SwimlaneModel } from './model'
import type { EventDto, SessionSnapshot, TraceSummary } from './types'

export interface ExplorerState {
  traces: TraceSummary[]
  traceId: string | null
  events: EventDto[]
  snapshot: SessionSnapshot | null
  axis: Axis
  pending: boolean
  notice: string | null
  error: string | null
}

export function initialState(): ExplorerState {
  return {
    traces: [],
    traceId: null,
    events: [],
    snapshot: null,
    axis: 'pt',
    pending: false,
    notice: null,
    error: null,
  }
}

export class ExplorerController {
  state: ExplorerState = initialState()
  onChange: (state: ExplorerState) => void = () => {}

  constructor(private api: ServiceApi) {}

  private emit(patch: Partial<ExplorerState>): void {
    this.state = { ...this.state, ...patch }
    this.onChange(this.state)
  }

  model(): SwimlaneModel {
    return applySession(buildSwimlane(this.state.events, this.state.axis), this.state.snapshot)
  }

  async refreshTraces(): Promise<void> {
    try {
      this.emit({ traces: await this.api.listTraces(), error: null })
    } catch (err) {
      this.emit({ error: describe(err) })
    }
  }

  async loadTrace(traceId: string): Promise<void> {
    this.emit({ pending: true, notice: null, error: null })
    try {
      const page = await this.api.getAllEvents(traceId)
      this.emit({ traceId, events: page.events, snapshot: null, pending: false })
    } catch (err) {
      this.emit({ pending: false, error: describe(err) })
    }
  }

  async startSession(seed: number): Promise<void> {
    if (!this.state.traceId || this.state.pending) return
    this.emit({ pending: true, notice: null, error: null })
    try {
      const snapshot = await this.api.createSession(this.state.traceId, seed)
      this.emit({ snapshot, pending: false })
    } catch (err) {
      this.emit({ pending: false, error: describe(err) })
    }
  }

  canChoose(eventId: number): boolean {
    const snap = this.state.snapshot
    if (!snap || this.state.pending) return false
    return snap.frontline.some((f) => f.event_id === eventId)
  }

  async choose(eventId: number): Promise<void> {
    const snap = this.state.snapshot
    if (!snap || this.state.pending) return
    if (!this.canChoose(eventId)) return // non-frontline glyphs are inert
    this.emit({ pending: true, notice: null })
    try {
      const snapshot = await this.api.step(snap.session_id, eventId)
      this.emit({ snapshot, pending: false })
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // stale frontline: tell the user and re-sync, nothing else changes
        let fresh = snap
        try {
          fresh = await this.api.getSession(snap.session_id)
        } catch {
          /* keep the last snapshot */
        }
        this.emit({
          snapshot: fresh,
          pending: false,
          notice: `event ${eventId} is no longer in the frontline`,
        })
        return
      }
      this.emit({ pending: false, error: describe(err) })
    }
  }

  async auto(count: number): Promise<void> {
    const snap = this.state.snapshot
    if (!snap || this.state.pending) return
    this.emit({ pending: true, notice: null })
    try {
      const snapshot = await this.api.autoStep(snap.session_id, count)
      this.emit({ snapshot, pending: false })
    } catch (err) {
      this.emit({ pending: false, error: describe(err) })
    }
  }

  async reset(): Promise<void> {
    const snap = this.state.snapshot
    if (!snap || this.state.pending) return
    this.emit({ pending: true, notice: null })
    try {
      const snapshot = await this.api.reset(snap.session_id)
      this.emit({ snapshot, pending: false })
    } catch (err) {
      this.emit({ pending: false, error: describe(err) })
    }
  }

  setAxis(axis: Axis): void {
    this.emit({ axis })
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `service error ${err.status}: ${JSON.stringify(err.detail)}`
  return err instanceof Error ? err.message : String(err)
}
