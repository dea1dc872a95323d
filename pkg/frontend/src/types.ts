// Wire types of the replayclock session service.

export interface TraceSummary {
  trace_id: string
  n: number
  epsilon_time: number
  interval: number
  alpha: number
  delta: number
  event_count: number
}

export interface TimestampDto {
  mx: number
  offsets: Record<string, number>
  counters: Record<string, number>
}

export interface EventDto {
  event_id: number
  proc: number
  kind: 'send' | 'recv' | 'local'
  pt: number
  real_time: number
  msg_id: number | null
  repcl: TimestampDto
  repcl_words: string[]
  oracle_vc: number[]
  oracle_mpt: number
}

export interface EventPage {
  trace_id: string
  from: number
  limit: number
  total: number
  events: EventDto[]
}

export interface FrontlineEntry {
  event_id: number
  proc: number
  kind: string
  pt: number
  mx: number
}

export interface SessionSnapshot {
  session_id: string
  trace_id: string
  chosen_prefix: number[]
  frontline: FrontlineEntry[]
  remaining_count: number
}
