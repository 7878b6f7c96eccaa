/** Typed client for the annotation server's REST API.
 *
 * Every displayed value round-trips through these calls; the UI never
 * fabricates state. The fetch function is injectable so tests can replay
 * recorded responses.
 */

export type Point = [number, number];

export interface FolderSummary {
  folder_id: string;
  image_count: number;
  unannotated: number;
  in_progress: number;
  annotated: number;
}

export interface HierarchyNode {
  node_id: string;
  name: string;
  children: HierarchyNode[];
}

export interface LeaseInfo {
  lease_token: string;
  image_id: string;
  ttl_seconds: number;
  expires_at: number;
}

export interface NextImage {
  image: {
    image_id: string;
    folder_id: string;
    url: string;
    width: number;
    height: number;
  };
  lease: LeaseInfo;
  hierarchy: HierarchyNode;
}

export interface AnnotationDoc {
  annotation_id: string;
  image_id: string;
  polygon: Point[];
  label_id: string;
  author: { kind: string; id: string };
  confidence: number;
  status: string;
  revision: number;
  machine_authored: boolean;
}

export interface ReferenceImage {
  label_id: string;
  file_path: string;
  caption: string | null;
  url: string;
}

export interface TimelinePoint {
  training_instance: number;
  mean_iou: number;
}

export interface ModelTimeline {
  model_id: string;
  series: TimelinePoint[];
  plateaued: boolean;
}

export interface ModelEntry {
  model_id: string;
  display_name: string;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T | null> {
    const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (response.status === 204) return null;
    const payload = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, payload.error ?? "Error", payload.message ?? "");
    }
    return payload as T;
  }

  listFolders(): Promise<FolderSummary[] | null> {
    return this.request("GET", "/api/folders");
  }

  nextImage(folderId: string, userId: string): Promise<NextImage | null> {
    return this.request("POST", `/api/folders/${folderId}/next-image`, { user_id: userId });
  }

  heartbeat(token: string): Promise<LeaseInfo | null> {
    return this.request("POST", `/api/leases/${token}/heartbeat`);
  }

  releaseLease(token: string): Promise<{ released: boolean } | null> {
    return this.request("DELETE", `/api/leases/${token}`);
  }

  submitAnnotation(imageId: string, leaseToken: string, polygon: Point[],
                   labelId: string, userId: string): Promise<AnnotationDoc | null> {
    return this.request("POST", `/api/images/${imageId}/annotations`, {
      lease_token: leaseToken,
      polygon,
      label_id: labelId,
      user_id: userId,
    });
  }

  qcQueue(authorKind?: string): Promise<AnnotationDoc[] | null> {
    const query = authorKind ? `?author_kind=${authorKind}` : "";
    return this.request("GET", `/api/qc${query}`);
  }

  qcAccept(annotationId: string, reviewer: string): Promise<AnnotationDoc | null> {
    return this.request("POST", `/api/qc/${annotationId}/accept`, { reviewer });
  }

  qcReject(annotationId: string, reviewer: string, reason: string): Promise<AnnotationDoc | null> {
    return this.request("POST", `/api/qc/${annotationId}/reject`, { reviewer, reason });
  }

  qcEdit(annotationId: string, reviewer: string,
         changes: { polygon?: Point[]; label_id?: string }): Promise<AnnotationDoc | null> {
    return this.request("PATCH", `/api/qc/${annotationId}`, { reviewer, ...changes });
  }

  references(labelId: string): Promise<ReferenceImage[] | null> {
    return this.request("GET", `/api/labels/${labelId}/references`);
  }

  listModels(): Promise<ModelEntry[] | null> {
    return this.request("GET", "/api/models");
  }

  modelTimeline(modelId: string): Promise<ModelTimeline | null> {
    return this.request("GET", `/api/metrics/models/${modelId}`);
  }

  classTimeline(modelId: string, labelId: string): Promise<ModelTimeline | null> {
    return this.request("GET", `/api/metrics/models/${modelId}/classes/${labelId}`);
  }

  imageAnnotations(imageId: string): Promise<AnnotationDoc[] | null> {
    return this.request("GET", `/api/images/${imageId}/annotations`);
  }
}
