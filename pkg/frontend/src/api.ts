import type { EventPage, SessionSnapshot, TraceSummary } from './types'

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(`service returned ${status}`)
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, {
    headers: { 'Content-Type': 'application/json' },
    ...init,
  })
  const body = await resp.json().catch(() => null)
  if (!resp.ok) {
    throw new ApiError(resp.status, body && (body as any).detail !== undefined ? (body as any).detail : body)
  }
  return body as T
}

// Thin typed client; every ordering decision stays on the server.
export class ServiceApi {
  constructor(readonly baseUrl: string) {}

  listTraces(): Promise<TraceSummary[]> {
    return request(`${this.baseUrl}/traces`)
  }

  getEvents(traceId: string, from = 0, limit = 500): Promise<EventPage> {
    const q = new URLSearchParams({ from: String(from), limit: String(limit) })
    return request(`${this.baseUrl}/traces/${encodeURIComponent(traceId)}/events?${q}`)
  }

  async getAllEvents(traceId: string, pageSize = 1000): Promise<EventPage> {
    const first = await this.getEvents(traceId, 0, pageSize)
    const events = [...first.events]
    while (events.length < first.total) {
      const page = await this.getEvents(traceId, events.length, pageSize)
      if (page.events.length === 0) break
      events.push(...page.events)
    }
    return { ...first, events, limit: events.length }
  }

  createSession(traceId: string, seed: number): Promise<SessionSnapshot> {
    return request(`${this.baseUrl}/sessions`, {
      method: 'POST',
      body: JSON.stringify({ trace_id: traceId, seed }),
    })
  }

  getSession(sessionId: string): Promise<SessionSnapshot> {
    return request(`${this.baseUrl}/sessions/${sessionId}`)
  }

  step(sessionId: string, eventId: number): Promise<SessionSnapshot> {
    return request(`${this.baseUrl}/sessions/${sessionId}/step`, {
      method: 'POST',
      body: JSON.stringify({ event_id: eventId }),
    })
  }

  autoStep(sessionId: string, count: number): Promise<SessionSnapshot> {
    return request(`${this.baseUrl}/sessions/${sessionId}/auto-step`, {
      method: 'POST',
      body: JSON.stringify({ count }),
    })
  }

  reset(sessionId: string): Promise<SessionSnapshot> {
    return request(`${this.baseUrl}/sessions/${sessionId}/reset`, {
      method: 'POST',
      body: JSON.stringify({}),
    })
  }
}
