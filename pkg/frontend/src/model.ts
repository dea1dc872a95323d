// Pure view-model computation: everything the renderer draws is derived
// here from (trace events, session snapshot, axis choice) with no I/O, so
// the replay semantics stay on the server and the layout stays testable.

import type { EventDto, SessionSnapshot } from './types'

export type Axis = 'pt' | 'real_time'
export type GlyphStatus = 'pending' | 'frontline' | 'replayed'

export interface LaneView {
  proc: number
  y: number
  label: string
}

export interface GlyphView {
  eventId: number
  proc: number
  kind: string
  x: number
  y: number
  label: string
  status: GlyphStatus
  orderIndex: number | null // position in the replayed prefix
  clickable: boolean
  tooltip: string
}

export interface ArcView {
  msgId: number
  fromEventId: number
  toEventId: number
  x1: number
  y1: number
  x2: number
  y2: number
}

export interface SwimlaneModel {
  axis: Axis
  width: number
  height: number
  lanes: LaneView[]
  glyphs: GlyphView[]
  arcs: ArcView[]
}

export interface LayoutOptions {
  width?: number
  laneHeight?: number
  marginX?: number
}

const DEFAULTS = { width: 960, laneHeight: 56, marginX: 60 }

export function eventLabel(eventId: number, totalEvents: number): string {
  if (totalEvents <= 26 && eventId >= 0 && eventId < 26) {
    return String.fromCharCode(65 + eventId)
  }
  return String(eventId)
}

function formatTimestamp(ev: EventDto): string {
  const offsets = Object.entries(ev.repcl.offsets)
    .map(([p, v]) => `${p}:${v}`)
    .join(' ')
  const counters = Object.entries(ev.repcl.counters)
    .map(([p, v]) => `${p}:${v}`)
    .join(' ')
  return (
    `${ev.kind} on P${ev.proc} | pt=${ev.pt} real=${ev.real_time}` +
    ` | mx=${ev.repcl.mx} offsets{${offsets}}` +
    (counters ? ` counters{${counters}}` : '')
  )
}

export function buildSwimlane(
  events: EventDto[],
  axis: Axis,
  opts: LayoutOptions = {},
): SwimlaneModel {
  const { width, laneHeight, marginX } = { ...DEFAULTS, ...opts }
  const procs = [...new Set(events.map((e) => e.proc))].sort((a, b) => a - b)
  const lanes: LaneView[] = procs.map((proc, i) => ({
    proc,
    y: laneHeight * (i + 0.5),
    label: `P${proc}`,
  }))
  const laneY = new Map(lanes.map((l) => [l.proc, l.y]))

  const values = events.map((e) => (axis === 'pt' ? e.pt : e.real_time))
  const lo = values.length ? Math.min(...values) : 0
  const hi = values.length ? Math.max(...values) : 1
  const span = hi - lo || 1
  const scale = (v: number) => marginX + ((v - lo) / span) * (width - 2 * marginX)

  const glyphs: GlyphView[] = events.map((ev) => ({
    eventId: ev.event_id,
    proc: ev.proc,
    kind: ev.kind,
    x: scale(axis === 'pt' ? ev.pt : ev.real_time),
    y: laneY.get(ev.proc) ?? 0,
    label: eventLabel(ev.event_id, events.length),
    status: 'pending',
    orderIndex: null,
    clickable: false,
    tooltip: formatTimestamp(ev),
  }))
  const byId = new Map(glyphs.map((g) => [g.eventId, g]))

  const sends = new Map<number, EventDto>()
  for (const ev of events) {
    if (ev.kind === 'send' && ev.msg_id !== null) sends.set(ev.msg_id, ev)
  }
  const arcs: ArcView[] = []
  for (const ev of events) {
    if (ev.kind !== 'recv' || ev.msg_id === null) continue
    const origin = sends.get(ev.msg_id)
    if (!origin) continue // partial page: the matching send is not loaded
    const from = byId.get(origin.event_id)!
    const to = byId.get(ev.event_id)!
    arcs.push({
      msgId: ev.msg_id,
      fromEventId: origin.event_id,
      toEventId: ev.event_id,
      x1: from.x,
      y1: from.y,
      x2: to.x,
      y2: to.y,
    })
  }

  return {
    axis,
    width,
    height: laneHeight * Math.max(lanes.length, 1),
    lanes,
    glyphs,
    arcs,
  }
}

// Decorate a layout with a session snapshot; the result is a fresh model and
// the input is left untouched.
export function applySession(
  model: SwimlaneModel,
  snapshot: SessionSnapshot | null,
): SwimlaneModel {
  if (!snapshot) {
    return {
      ...model,
      glyphs: model.glyphs.map((g) => ({
        ...g,
        status: 'pending',
        orderIndex: null,
        clickable: false,
      })),
    }
  }
  const orderOf = new Map(snapshot.chosen_prefix.map((id, i) => [id, i]))
  const frontline = new Set(snapshot.frontline.map((f) => f.event_id))
  const glyphs = model.glyphs.map((g): GlyphView => {
    if (orderOf.has(g.eventId)) {
      return { ...g, status: 'replayed', orderIndex: orderOf.get(g.eventId)!, clickable: false }
    }
    if (frontline.has(g.eventId)) {
      return { ...g, status: 'frontline', orderIndex: null, clickable: true }
    }
    return { ...g, status: 'pending', orderIndex: null, clickable: false }
  })
  return { ...model, glyphs }
}

export function clickableIds(model: SwimlaneModel): number[] {
  return model.glyphs.filter((g) => g.clickable).map((g) => g.eventId).sort((a, b) => a - b)
}

export function replayedSequence(model: SwimlaneModel): number[] {
  return model.glyphs
    .filter((g) => g.orderIndex !== null)
    .sort((a, b) => a.orderIndex! - b.orderIndex!)
    .map((g) => g.eventId)
}
