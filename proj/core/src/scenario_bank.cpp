#include <memory>

#include "kubediag/harness.hpp"

namespace kubediag::harness {

using graph::Category;
using graph::NodeType;
using graph::Relation;

namespace {

using Decoy = std::optional<std::pair<std::string, std::string>>;

std::vector<ScenarioTemplate> build_bank() {
    std::vector<ScenarioTemplate> b;
    auto add = [&](std::string key, Category cat, std::string reason, std::string workload,
                   std::vector<std::string> symptoms, NodeType ctype, std::string component, Relation via,
                   std::string root_cause, std::vector<std::string> steps, Decoy decoy = std::nullopt) {
        b.push_back(ScenarioTemplate{std::move(key), cat, std::move(reason), std::move(workload), std::move(symptoms),
                                     ctype, std::move(component), via, std::move(root_cause), std::move(steps),
                                     std::move(decoy)});
    };

    // Resource errors
    add("oom-killed", Category::ResourceErrors, "OOMKilled", "deployment",
        {"container terminated with reason OOMKilled", "exit code 137 reported by kubelet",
         "restart count keeps climbing", "working set memory reaches configured limit"},
        NodeType::Container, "container memory limit", Relation::DependsOn,
        "container memory limit set below workload peak usage",
        {"kubectl describe pod {pod}", "kubectl top pod {pod} --containers",
         "raise resources.limits.memory in the deployment spec"},
        Decoy{{"node kubelet eviction manager", "node memory pressure triggering kubelet eviction"}});
    add("cpu-throttling", Category::ResourceErrors, "CPUThrottlingHigh", "deployment",
        {"request latency spikes during traffic peaks", "cpu throttling ratio above ninety percent",
         "cfs quota periods exhausted repeatedly", "liveness probe timeouts under load"},
        NodeType::Container, "container cpu quota", Relation::DependsOn, "cpu limit too tight causing cfs throttling",
        {"kubectl top pod {pod}", "inspect container_cpu_cfs_throttled_seconds_total for {pod}",
         "raise or remove resources.limits.cpu"});
    add("ephemeral-storage", Category::ResourceErrors, "Evicted", "statefulset",
        {"pod evicted for exceeding ephemeral storage", "emptydir scratch volume grows without bound",
         "kubelet reports disk usage over threshold", "log files accumulate inside writable layer"},
        NodeType::Volume, "emptydir scratch volume", Relation::Mounts,
        "ephemeral storage limit exceeded by unrotated logs",
        {"kubectl describe pod {pod}", "check emptydir usage with kubectl exec {pod} -- du -sh /scratch",
         "add log rotation and set resources.limits.ephemeral-storage"},
        Decoy{{"node root filesystem", "node disk pressure from image garbage collection"}});
    add("quota-exceeded", Category::ResourceErrors, "FailedCreate", "replicaset",
        {"replicaset cannot create new replicas", "forbidden exceeded quota error in events",
         "namespace resourcequota hard limits reached", "rollout stalls with zero available"},
        NodeType::Namespace, "namespace resource quota", Relation::Configures,
        "namespace resourcequota exhausted by requested resources",
        {"kubectl describe resourcequota", "kubectl get pods -o wide to find idle consumers near {pod}",
         "raise the quota or lower per pod requests"});
    add("pid-exhaustion", Category::ResourceErrors, "PIDPressure", "daemonset",
        {"fork failures reported by application threads", "cannot allocate thread resource temporarily unavailable",
         "process table nearly full inside container", "zombie processes never reaped"},
        NodeType::Container, "container process limit", Relation::DependsOn,
        "pid limit exhausted by leaked child processes",
        {"kubectl exec {pod} -- ps -ef", "add an init process such as tini to reap children",
         "set podPidsLimit to a sane value"});

    // Network errors
    add("dns-failure", Category::NetworkErrors, "DNSResolutionFailed", "deployment",
        {"lookups for cluster service names time out", "nslookup against kube-dns returns servfail",
         "application logs show unknown host errors", "coredns pods report upstream timeouts"},
        NodeType::Service, "coredns service", Relation::DependsOn, "coredns upstream resolver unreachable",
        {"kubectl exec {pod} -- nslookup kubernetes.default", "kubectl logs -n kube-system -l k8s-app=kube-dns",
         "fix the forward block in the coredns configmap"},
        Decoy{{"network policy egress rules", "egress network policy blocking port 53"}});
    add("service-no-endpoints", Category::NetworkErrors, "NoEndpoints", "service",
        {"service has zero ready endpoints", "connection refused when calling clusterip",
         "selector labels do not match any pod", "endpoints object stays empty after rollout"},
        NodeType::Service, "service label selector", Relation::Exposes, "service selector mismatched with pod labels",
        {"kubectl get endpoints", "kubectl get pod {pod} --show-labels", "align spec.selector with the pod template labels"});
    add("ingress-bad-gateway", Category::NetworkErrors, "BadGateway", "ingress",
        {"ingress controller returns bad gateway 502", "upstream connect error before headers",
         "external clients see intermittent gateway failures", "backend health checks failing at load balancer"},
        NodeType::Ingress, "ingress backend target port", Relation::Exposes,
        "ingress backend pointing to wrong service port",
        {"kubectl describe ingress", "compare servicePort with the port {pod} listens on",
         "correct the backend service port"},
        Decoy{{"ingress controller replica", "ingress controller pods out of memory"}});
    add("policy-deny", Category::NetworkErrors, "PolicyDenied", "deployment",
        {"traffic between namespaces silently dropped", "tcp handshakes hang without reset",
         "recent default deny policy applied", "only same namespace callers succeed"},
        NodeType::Namespace, "namespace network policy", Relation::Configures,
        "default deny network policy lacks allow rule",
        {"kubectl get networkpolicy", "test connectivity from {pod} with curl", "add an ingress allow rule for callers"});
    add("mtu-mismatch", Category::NetworkErrors, "PacketLoss", "daemonset",
        {"large payloads stall while small requests pass", "tls handshakes freeze midway",
         "packet fragmentation counters increasing on overlay", "vxlan interface drops oversized frames"},
        NodeType::Node, "overlay network interface", Relation::SchedulesOn,
        "overlay mtu larger than underlying network path",
        {"ping with do-not-fragment from {pod}", "compare cni mtu with host interface mtu",
         "lower the cni mtu and restart the agent"});

    // Scheduling errors
    add("insufficient-cpu", Category::SchedulingErrors, "FailedScheduling", "deployment",
        {"pods remain pending indefinitely", "scheduler reports insufficient cpu on all nodes",
         "cluster autoscaler not adding capacity", "requests sum exceeds allocatable"},
        NodeType::Node, "node allocatable cpu", Relation::SchedulesOn, "cpu requests exceed total allocatable capacity",
        {"kubectl describe pod {pod}", "kubectl describe nodes | grep -A5 Allocated",
         "lower requests or add nodes to the pool"},
        Decoy{{"scheduler extender webhook", "scheduler extender webhook timing out"}});
    add("untolerated-taint", Category::SchedulingErrors, "FailedScheduling", "job",
        {"untolerated taint blocks placement", "dedicated nodes reserved for gpu jobs",
         "failedscheduling message lists taints", "workload lacks matching tolerations"},
        NodeType::Node, "node taints", Relation::SchedulesOn, "node taints without matching pod tolerations",
        {"kubectl describe pod {pod}", "kubectl get nodes -o custom-columns=NAME:.metadata.name,TAINTS:.spec.taints",
         "add the matching toleration to the pod spec"});
    add("anti-affinity", Category::SchedulingErrors, "FailedScheduling", "statefulset",
        {"required anti affinity cannot be satisfied", "replicas exceed available zones",
         "topology spread constraint violated", "second replica never lands"},
        NodeType::Deployment, "deployment affinity rules", Relation::Manages,
        "hard anti affinity requires more zones than exist",
        {"kubectl get pod {pod} -o yaml | grep -A10 affinity", "count zones with kubectl get nodes -L topology.kubernetes.io/zone",
         "switch to preferred anti affinity"},
        Decoy{{"zone capacity reservation", "zone outage removing schedulable nodes"}});
    add("unbound-claim", Category::SchedulingErrors, "FailedBinding", "statefulset",
        {"pod has unbound immediate persistentvolumeclaims", "storageclass provisioner never responds",
         "claim stays in pending phase", "volume binding waits for provisioning"},
        NodeType::Volume, "persistent volume claim", Relation::Mounts,
        "storageclass provisioner missing so claim never binds",
        {"kubectl describe pvc", "kubectl get storageclass", "install the provisioner or fix the storageclass name used by {pod}"});
    add("node-selector", Category::SchedulingErrors, "FailedScheduling", "deployment",
        {"node selector matches no labeled node", "pod spec requires disktype ssd label",
         "no nodes carry requested label", "placement fails after node replacement"},
        NodeType::Node, "node labels", Relation::SchedulesOn, "nodeselector label absent from every node",
        {"kubectl get nodes --show-labels", "kubectl get pod {pod} -o jsonpath={.spec.nodeSelector}",
         "relabel the replacement nodes"});

    // Image errors
    add("missing-tag", Category::ImageErrors, "ImagePullBackOff", "deployment",
        {"status shows imagepullbackoff", "manifest for tag not found in registry", "back off pulling image repeatedly",
         "errimagepull listed in pod events"},
        NodeType::Container, "container image reference", Relation::DependsOn, "image tag does not exist in registry",
        {"kubectl describe pod {pod}", "list tags in the registry repository", "pin the deployment to a published tag"},
        Decoy{{"registry pull secret", "registry credentials expired in pull secret"}});
    add("registry-auth", Category::ImageErrors, "ErrImagePull", "deployment",
        {"unauthorized authentication required from registry", "private repository rejects anonymous pull",
         "imagepullsecrets field missing from spec", "401 response while fetching manifest"},
        NodeType::Secret, "image pull secret", Relation::Configures, "missing imagepullsecret for private registry",
        {"kubectl get pod {pod} -o jsonpath={.spec.imagePullSecrets}", "create a docker-registry secret",
         "reference it from imagePullSecrets or the serviceaccount"});
    add("arch-mismatch", Category::ImageErrors, "CrashLoopBackOff", "daemonset",
        {"exec format error at container start", "binary built for different cpu architecture",
         "arm64 nodes run amd64 only image", "crash occurs before any log output"},
        NodeType::Container, "container image platform", Relation::DependsOn,
        "image architecture incompatible with node platform",
        {"kubectl logs {pod} --previous", "docker manifest inspect the image", "publish a multi arch image"},
        Decoy{{"container entrypoint script", "entrypoint script missing executable permission"}});
    add("pull-rate-limit", Category::ImageErrors, "ErrImagePull", "job",
        {"toomanyrequests returned by docker hub", "pull rate limit reached for anonymous user",
         "many nodes pulling simultaneously", "image pulls fail only during scale out"},
        NodeType::Node, "node image puller", Relation::SchedulesOn, "registry pull rate limit exceeded",
        {"kubectl describe pod {pod}", "authenticate pulls or add a pull through cache", "mirror the image to a private registry"});
    add("slow-pull", Category::ImageErrors, "ErrImagePull", "deployment",
        {"image pull exceeds deadline on cold nodes", "multi gigabyte layers download slowly",
         "context deadline exceeded while pulling", "first start takes many minutes"},
        NodeType::Container, "container image size", Relation::DependsOn, "oversized image layers exceed pull timeout",
        {"kubectl describe pod {pod}", "inspect layer sizes with docker history", "slim the image and pre pull on nodes"});

    // Configuration errors
    add("missing-configmap", Category::ConfigurationErrors, "CreateContainerConfigError", "deployment",
        {"createcontainerconfigerror in status", "configmap referenced by envfrom not found",
         "container never starts after deploy", "keys expected by application absent"},
        NodeType::ConfigMap, "application configmap", Relation::Configures, "referenced configmap missing from namespace",
        {"kubectl describe pod {pod}", "kubectl get configmap", "create the configmap before rolling out"},
        Decoy{{"admission webhook mutation", "mutating webhook stripped environment variables"}});
    add("secret-key", Category::ConfigurationErrors, "CreateContainerConfigError", "statefulset",
        {"couldn't find key password in secret", "secretkeyref points at renamed key",
         "credential rotation changed key names", "startup blocked waiting for secret value"},
        NodeType::Secret, "database credentials secret", Relation::Configures,
        "secret key name changed during credential rotation",
        {"kubectl describe pod {pod}", "kubectl get secret -o jsonpath={.data}", "update secretKeyRef to the new key name"});
    add("bad-probe", Category::ConfigurationErrors, "Unhealthy", "deployment",
        {"liveness probe failed with http 404", "container restarted by kubelet repeatedly despite healthy app",
         "probe path differs from served route", "readiness never reports success"},
        NodeType::Pod, "pod health probes", Relation::Configures, "probe configured with wrong http path",
        {"kubectl describe pod {pod}", "curl the probe path from inside {pod}", "fix httpGet.path in the probe"},
        Decoy{{"application startup dependency", "slow database dependency delaying startup"}});
    add("wrong-env", Category::ConfigurationErrors, "ConfigDrift", "deployment",
        {"application connects to staging endpoint in production", "environment variable overrides default url",
         "feature flags differ between replicas", "config drift after helm upgrade"},
        NodeType::ConfigMap, "environment overrides", Relation::Configures,
        "environment variable points to wrong endpoint",
        {"kubectl exec {pod} -- env", "helm get values for the release", "correct the override in values"});
    add("rbac-forbidden", Category::ConfigurationErrors, "Forbidden", "operator",
        {"serviceaccount cannot list pods", "forbidden user system serviceaccount in api logs",
         "controller reconcile loop errors", "rolebinding absent for operator"},
        NodeType::Namespace, "namespace role bindings", Relation::Configures, "serviceaccount lacks rbac role binding",
        {"kubectl auth can-i list pods --as system:serviceaccount", "kubectl logs {pod}", "grant the role with a rolebinding"});

    // System errors
    add("node-notready", Category::SystemErrors, "NodeNotReady", "node",
        {"node status flips to notready", "kubelet stopped posting node status", "pods on node marked unknown",
         "heartbeat lease renewals missing"},
        NodeType::Node, "node kubelet process", Relation::SchedulesOn,
        "kubelet crashed after container runtime socket failure",
        {"kubectl describe node hosting {pod}", "journalctl -u kubelet on the node", "restart the runtime and kubelet"},
        Decoy{{"control plane apiserver", "apiserver overload dropping lease updates"}});
    add("etcd-latency", Category::SystemErrors, "SlowRequests", "control-plane",
        {"apiserver requests slow across cluster", "etcd wal fsync duration high", "leader elections happen frequently",
         "kubectl commands time out intermittently"},
        NodeType::Service, "etcd cluster", Relation::DependsOn, "etcd disk latency too high for consensus",
        {"check etcd_disk_wal_fsync_duration_seconds", "etcdctl endpoint status", "move etcd to faster disks"});
    add("cert-expired", Category::SystemErrors, "CertificateExpired", "control-plane",
        {"x509 certificate has expired errors", "kubelet cannot authenticate to apiserver",
         "tls handshake failures between components", "cluster broke on anniversary date"},
        NodeType::Secret, "cluster certificates", Relation::Configures,
        "control plane certificates expired without rotation",
        {"kubeadm certs check-expiration", "kubectl logs {pod}", "renew certificates and restart components"},
        Decoy{{"cluster time synchronization", "clock skew between nodes breaking tls"}});
    add("conntrack-full", Category::SystemErrors, "ConnectionDrops", "node",
        {"nf_conntrack table full dropping packet in dmesg", "new connections randomly refused",
         "high connection churn from batch jobs", "kernel logs show table overflow"},
        NodeType::Node, "node conntrack table", Relation::SchedulesOn,
        "conntrack table size too small for connection churn",
        {"sysctl net.netfilter.nf_conntrack_count on the node of {pod}", "raise nf_conntrack_max",
         "reuse connections in batch jobs"});
    add("runtime-disk", Category::SystemErrors, "RuntimeDiskFull", "node",
        {"container runtime reports no space left", "image layers fill var lib containerd",
         "new containers fail to create", "garbage collection thresholds never trigger"},
        NodeType::Node, "container runtime storage", Relation::SchedulesOn, "container runtime storage filesystem full",
        {"df -h /var/lib/containerd on the node of {pod}", "crictl rmi --prune", "tune imageGCHighThresholdPercent"});
    return b;
}

}  // namespace

const std::vector<ScenarioTemplate>& scenario_templates() {
    static const std::vector<ScenarioTemplate> bank = build_bank();
    return bank;
}

graph::KnowledgeGraph reference_graph(std::shared_ptr<const Embedder> embedder) {
    graph::KnowledgeGraph g(std::move(embedder));
    for (const auto& t : scenario_templates()) {
        std::string symptoms;
        for (const auto& s : t.symptoms) symptoms += (symptoms.empty() ? "" : " ") + s;
        const graph::GraphNode event{"evt-" + t.key, NodeType::Event, symptoms, {{"reason", t.reason}}, t.category};
        const graph::GraphNode component{"cmp-" + t.key, t.component_type, t.component, {}, t.category};
        const graph::GraphNode cause{"rc-" + t.key, NodeType::RootCause, t.root_cause, {}, t.category};
        const double w1 = t.decoy ? 0.6 : 0.8;
        const double w2 = t.decoy ? 0.5 : 0.7;
        g.add_triple(event, graph::GraphEdge{event.id, component.id, t.via, w1}, component);
        g.add_triple(component, graph::GraphEdge{component.id, cause.id, Relation::Causes, w2}, cause);
        if (t.decoy) {
            const graph::GraphNode dcomp{"dcmp-" + t.key, NodeType::Node, t.decoy->first, {}, t.category};
            const graph::GraphNode dcause{"drc-" + t.key, NodeType::RootCause, t.decoy->second, {}, t.category};
            g.add_triple(event, graph::GraphEdge{event.id, dcomp.id, Relation::DependsOn, 0.9}, dcomp);
            g.add_triple(dcomp, graph::GraphEdge{dcomp.id, dcause.id, Relation::Causes, 0.85}, dcause);
        }
    }
    return g;
}

}  // namespace kubediag::harness
